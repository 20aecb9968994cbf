#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "confine/io.hpp"
#include "confine/potentials.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "confine_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(CONFINE_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("check-kernel reports a positive alpha for the H-stable Morse kernel") {
  const Result r = cli("check-kernel morse C_A=1 l_A=1 C_R=1.9 l_R=0.8");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("alpha_integral").get<double>() > 0.0);
  CHECK(j.at("alpha_integral").get<double>() == doctest::Approx(2.0 * M_PI * 0.216).epsilon(1e-9));
  CHECK(j.at("conf_class") == "FAILS");
}

TEST_CASE("check-kernel on the log kernel") {
  const Result r = cli("check-kernel piecewise_log");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("conf_class") == "BORDERLINE");
  CHECK(j.at("conf_limit").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("alpha_integral") == "NOT_INTEGRABLE");
}

TEST_CASE("usage errors exit with 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("check-kernel").code == 1);
  CHECK(cli("check-kernel nonsense").code == 1);
  CHECK(cli("check-kernel morse C_R=abc").code == 1);
  CHECK(cli("run /does/not/exist.json").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("run on a converged snapshot exits immediately") {
  const confine::RadialKernel k = confine::make_piecewise_log();
  const double half = k.r_attract() / 2.0;
  const fs::path snap = scratch() / "pair.json";
  write(snap, confine::snapshot_to_json(confine::ParticleState(2, {-half, 0, half, 0}, {0.5, 0.5}), "piecewise_log")
                  .dump());
  const Result r = cli("run " + snap.string());
  CHECK(r.code == 0);
  CHECK(r.out.rfind("step,time,energy,radius,m3,max_speed\n0,", 0) == 0);
  CHECK(slurp(scratch() / "stderr.txt").find("converged=true steps=0") != std::string::npos);
}

TEST_CASE("run from a generated configuration writes the final state") {
  const fs::path cfg = scratch() / "run.json";
  write(cfg, R"({"kernel": {"name": "piecewise_log"}, "n": 20, "stepper": {"record_every": 50}})");
  const Result r = cli("run " + cfg.string() + " --out " + (scratch() / "run_out").string() + " --seed 4");
  CHECK(r.code == 0);
  CHECK(slurp(scratch() / "stderr.txt").find("converged=true") != std::string::npos);
  const confine::ParticleState s = confine::load_snapshot((scratch() / "run_out" / "final_state.csv").string());
  CHECK(s.size() == 20);
}

TEST_CASE("sweep is byte-reproducible in deterministic mode and regress reads its table") {
  const fs::path cfg = scratch() / "sweep.json";
  write(cfg, R"({"kernel": {"name": "piecewise_log"}, "n_values": [6, 10, 14], "trials_per_n": 2})");
  const fs::path a = scratch() / "sweep_a", b = scratch() / "sweep_b";
  REQUIRE(cli("sweep " + cfg.string() + " --deterministic --out " + a.string()).code == 0);
  REQUIRE(cli("--threads 2 sweep " + cfg.string() + " --deterministic --out " + b.string()).code == 0);
  CHECK(slurp(a / "radii.csv") == slurp(b / "radii.csv"));
  CHECK(slurp(a / "radii.csv").find(",0\n") != std::string::npos);

  const Result r = cli("regress " + (a / "radii.csv").string());
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("n").size() == 3);
  CHECK(j.contains("slope"));
}

TEST_CASE("regress on a degenerate table is a numeric failure") {
  const fs::path table = scratch() / "flat.csv";
  write(table, "n,trial,radius,converged,steps,wall_ms\n10,0,1.5,1,3,0\n10,1,1.6,1,3,0\n");
  CHECK(cli("regress " + table.string()).code == 2);
}

TEST_CASE("theory-check on a snapshot") {
  const fs::path snap = scratch() / "tri.csv";
  write(snap, "x1,x2,mass\n1,0,0.25\n-1,0,0.25\n0,2,0.5\n");
  const Result r = cli("theory-check " + snap.string() + " --kernel morse C_R=1.3 l_R=0.2");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const auto& c : j.at("checks")) CHECK(c.at("pass") == true);
}

TEST_CASE("diverging runs are numeric failures") {
  const fs::path cfg = scratch() / "escape.json";
  write(cfg, R"({"kernel": {"name": "piecewise_log"}, "n": 30, "stepper": {"radius_cap": 0.5}})");
  CHECK(cli("run " + cfg.string()).code == 2);
}
