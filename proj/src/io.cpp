#include "confine/io.hpp"

#include <fstream>
#include <sstream>

#include "confine/error.hpp"
#include "confine/format.hpp"

namespace confine {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw Error(ErrorCode::Parse, "trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Parse, "bad number '" + s + "'");
  }
}

}  // namespace

void write_snapshot_csv(std::ostream& os, const ParticleState& state) {
  for (int d = 0; d < state.dim(); ++d) os << 'x' << (d + 1) << ',';
  os << "mass\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    for (double x : state.position(i)) os << fmt17(x) << ',';
    os << fmt17(state.mass(i)) << '\n';
  }
}

ParticleState read_snapshot_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Parse, "empty snapshot");
  const auto header = split_csv(line);
  if (header.size() < 2 || header.back() != "mass") throw Error(ErrorCode::Parse, "snapshot header must end in 'mass'");
  const int dim = static_cast<int>(header.size()) - 1;
  std::vector<double> pos;
  std::vector<double> mass;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw Error(ErrorCode::Parse, "snapshot row has the wrong width");
    for (int d = 0; d < dim; ++d) pos.push_back(parse_double(cells[static_cast<std::size_t>(d)]));
    mass.push_back(parse_double(cells.back()));
  }
  return ParticleState(dim, std::move(pos), std::move(mass));
}

nlohmann::json snapshot_to_json(const ParticleState& state, const std::string& kernel_name) {
  nlohmann::json positions = nlohmann::json::array();
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto x = state.position(i);
    positions.push_back(std::vector<double>(x.begin(), x.end()));
  }
  return {{"dim", state.dim()},     {"n", state.size()},         {"time", state.time()},
          {"kernel", kernel_name}, {"positions", positions}, {"masses", state.masses()}};
}

ParticleState snapshot_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    std::vector<double> pos;
    for (const auto& p : j.at("positions")) {
      if (p.size() != static_cast<std::size_t>(dim)) throw Error(ErrorCode::Parse, "position has the wrong dimension");
      for (const auto& c : p) pos.push_back(c.get<double>());
    }
    auto masses = j.at("masses").get<std::vector<double>>();
    if (j.contains("n") && j.at("n").get<std::size_t>() != masses.size()) {
      throw Error(ErrorCode::Parse, "snapshot n disagrees with the mass list");
    }
    return ParticleState(dim, std::move(pos), std::move(masses), j.value("time", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Parse, "cannot write " + path);
  out << contents;
}

ParticleState load_snapshot(const std::string& path, std::string* kernel_name) {
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (is_json) {
    const auto j = read_json_file(path);
    if (kernel_name && j.contains("kernel") && j.at("kernel").is_string()) *kernel_name = j.at("kernel").get<std::string>();
    return snapshot_from_json(j);
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  return read_snapshot_csv(in);
}

}  // namespace confine
