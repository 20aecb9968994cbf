#include "confine/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "confine/error.hpp"
#include "confine/format.hpp"
#include "confine/io.hpp"

namespace confine {

double default_side(const RadialKernel& k, std::size_t n) {
  if (k.name() == "piecewise_log") return 3.0;
  if (k.name() == "piecewise_loglog") return 2.0 * std::numbers::e;
  if (k.name() == "morse") {
    const auto& p = k.params();
    const double c = p.at("C_R").get<double>() / p.at("C_A").get<double>();
    const double l = p.at("l_R").get<double>() / p.at("l_A").get<double>();
    if (c * l * l > 1.0) return std::sqrt(static_cast<double>(n)) * p.at("l_A").get<double>();
    return 2.0;
  }
  return 3.0;
}

ParticleState generate_initial(std::size_t n, int dim, const InitSpec& init, double far_distance, CounterRng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!(init.side > 0.0)) throw Error(ErrorCode::InvalidArgument, "square side must be positive");
  if (init.shape != "centered_square") throw Error(ErrorCode::InvalidArgument, "unknown initial shape " + init.shape);

  const std::size_t len = n * static_cast<std::size_t>(dim);
  const double far2 = far_distance * far_distance;
  constexpr int kMaxDraws = 10000;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    std::vector<double> pos(len);
    for (double& x : pos) x = (rng.uniform() - 0.5) * init.side;
    bool accepted = !init.min_far_pair || n < 2;
    for (std::size_t i = 0; i < n && !accepted; ++i) {
      for (std::size_t j = i + 1; j < n && !accepted; ++j) {
        double s = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double diff = pos[i * dim + d] - pos[j * dim + d];
          s += diff * diff;
        }
        accepted = s > far2;
      }
    }
    if (accepted) return recenter(ParticleState::with_equal_masses(dim, std::move(pos)));
  }
  throw Error(ErrorCode::RejectionExhausted, "no configuration with a far pair after 1e4 draws");
}

// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
  if (n_values.empty()) throw Error(ErrorCode::InvalidArgument, "n_values must not be empty");
  for (auto n : n_values) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  }
  if (trials_per_n == 0) throw Error(ErrorCode::InvalidArgument, "trials_per_n must be >= 1");
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");
  if (side_given && !(init.side > 0.0)) throw Error(ErrorCode::InvalidArgument, "side must be positive");
  stepper.validate();
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  try {
    if (j.contains("kernel")) s.kernel = j.at("kernel");
    s.dim = j.value("dim", 2);
    s.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    s.trials_per_n = j.value("trials_per_n", std::size_t{5});
    if (j.contains("init")) {
      const auto& in = j.at("init");
      s.init.shape = in.value("shape", s.init.shape);
      if (in.contains("side")) {
        s.init.side = in.at("side").get<double>();
        s.side_given = true;
      }
      s.init.min_far_pair = in.value("min_far_pair", s.init.min_far_pair);
      s.init.seed = in.value("seed", s.init.seed);
    }
    if (j.contains("stepper")) s.stepper = stepper_from_json(j.at("stepper"));
    s.outputs = j.value("outputs", std::string());
    s.regression = j.value("regression", false);
    s.snapshots = j.value("snapshots", false);
    s.diagnostics = j.value("diagnostics", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("experiment config: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json init = {{"shape", s.init.shape}, {"min_far_pair", s.init.min_far_pair}, {"seed", s.init.seed}};
  if (s.side_given) init["side"] = s.init.side;
  return {{"kernel", s.kernel},
          {"dim", s.dim},
          {"n_values", s.n_values},
          {"trials_per_n", s.trials_per_n},
          {"init", init},
          {"stepper", to_json(s.stepper)},
          {"outputs", s.outputs},
          {"regression", s.regression},
          {"snapshots", s.snapshots},
          {"diagnostics", s.diagnostics}};
}

// ---------------------------------------------------------------------------

RegressionFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y differ in length");
  const std::size_t m = x.size();
  if (m < 2) throw Error(ErrorCode::Degenerate, "regression needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::Degenerate, "all regression abscissae are equal");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.x = x;
  fit.y = y;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::vector<RadiusSummary> summarize(const std::vector<TrialResult>& trials) {
  std::vector<RadiusSummary> out;
  for (const auto& t : trials) {
    if (out.empty() || out.back().n != t.n) out.push_back(RadiusSummary{t.n});
    if (t.failed) continue;
    auto& s = out.back();
    if (s.trials == 0) {
      s.min = s.max = t.radius;
    } else {
      s.min = std::min(s.min, t.radius);
      s.max = std::max(s.max, t.radius);
    }
    s.mean += t.radius;
    ++s.trials;
    if (t.converged) ++s.converged;
  }
  for (auto& s : out) {
    if (s.trials > 0) s.mean /= static_cast<double>(s.trials);
  }
  return out;
}

RegressionFit regress_radius_squared(const ExperimentResult& result) {
  std::vector<double> x, y;
  for (const auto& s : result.per_n) {
    if (s.trials == 0) continue;
    x.push_back(static_cast<double>(s.n));
    y.push_back(s.mean * s.mean);
  }
  return least_squares(x, y);
}

// ---------------------------------------------------------------------------

namespace {

std::string trial_tag(std::size_t n, std::size_t trial) {
  return "n" + std::to_string(n) + "_t" + std::to_string(trial);
}

TrialResult run_trial(const ExperimentSpec& spec, const RadialKernel& k, std::size_t n, std::size_t trial,
                      bool write_files) {
  TrialResult res;
  res.n = n;
  res.trial = trial;
  const auto start = std::chrono::steady_clock::now();
  try {
    InitSpec init = spec.init;
    if (!spec.side_given) init.side = default_side(k, n);
    res.side = init.side;
    CounterRng rng(derive_seed(spec.init.seed, n, trial));
    const ParticleState initial = generate_initial(n, spec.dim, init, k.outer_radius(), rng);

    std::ostringstream diag;
    RecordSink sink;
    if (write_files && spec.diagnostics) {
      write_csv_header(diag, spec.stepper.record_dm3dt);
      sink = [&](const DiagnosticsRecord& r) { write_csv_row(diag, r, spec.stepper.record_dm3dt); };
    }
    const RunOutcome out = run_to_steady(initial, k, spec.stepper, EvalOptions{1}, sink);
    res.radius = radius(out.final_state);
    res.converged = out.converged;
    res.steps = out.steps;
    res.final_energy = out.final_energy;
    res.stalled = out.stalled;
    for (std::size_t h = 1; h < out.history.size(); ++h) {
      if (out.history[h].energy > out.history[h - 1].energy) ++res.energy_increases;
    }
    const Point c0 = center_of_mass(initial), c1 = center_of_mass(out.final_state);
    double drift = 0.0;
    for (std::size_t d = 0; d < c0.size(); ++d) drift += (c1[d] - c0[d]) * (c1[d] - c0[d]);
    res.com_drift = std::sqrt(drift);
    res.diameter = initial.diameter();

    if (write_files && spec.snapshots) {
      std::ostringstream snap;
      write_snapshot_csv(snap, out.final_state);
      write_text_file(spec.outputs + "/snapshot_" + trial_tag(n, trial) + ".csv", snap.str());
    }
    if (write_files && spec.diagnostics) {
      write_text_file(spec.outputs + "/diag_" + trial_tag(n, trial) + ".csv", diag.str());
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::Parse) throw;
    res.failed = true;
    res.error = e.what();
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const RadialKernel k = make_kernel(spec.kernel);
  const bool write_files = opts.write_outputs && !spec.outputs.empty();
  if (write_files) std::filesystem::create_directories(spec.outputs);

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (auto n : spec.n_values) {
    for (std::size_t t = 0; t < spec.trials_per_n; ++t) jobs.emplace_back(n, t);
  }

  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
      try {
        results[idx] = run_trial(spec, k, jobs[idx].first, jobs[idx].second, write_files);
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
        continue;
      }
      if (opts.progress) {
        std::lock_guard lock(log_mutex);
        const auto& r = results[idx];
        *opts.progress << k.name() << " n=" << r.n << " trial=" << r.trial << " radius=" << fmt17(r.radius)
                       << " converged=" << r.converged << " steps=" << r.steps << " wall_ms=" << r.wall_ms
                       << (r.failed ? " FAILED " + r.error : std::string()) << '\n'
                       << std::flush;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.concurrent_trials, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(results.begin(), results.end(),
            [](const TrialResult& a, const TrialResult& b) { return std::tie(a.n, a.trial) < std::tie(b.n, b.trial); });

  ExperimentResult result;
  result.trials = std::move(results);
  result.per_n = summarize(result.trials);
  if (spec.regression) result.regression = regress_radius_squared(result);

  if (write_files) {
    std::ostringstream radii;
    write_radii_csv(radii, result.trials, opts.deterministic);
    write_text_file(spec.outputs + "/radii.csv", radii.str());
    write_text_file(spec.outputs + "/summary.json", summary_json(spec, result).dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------

void write_radii_csv(std::ostream& os, const std::vector<TrialResult>& trials, bool zero_wall_time) {
  os << "n,trial,radius,converged,steps,wall_ms\n";
  for (const auto& t : trials) {
    os << t.n << ',' << t.trial << ',' << (t.failed ? std::string("nan") : fmt17(t.radius)) << ','
       << (t.converged ? 1 : 0) << ',' << t.steps << ',' << (zero_wall_time ? std::string("0") : fmt17(t.wall_ms))
       << '\n';
  }
}

std::vector<TrialResult> read_radii_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,trial,radius,converged,steps,wall_ms", 0) != 0) {
    throw Error(ErrorCode::Parse, "radii table must start with the n,trial,radius,converged,steps,wall_ms header");
  }
  std::vector<TrialResult> out;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorCode::Parse, "radii row needs 6 columns: " + line);
    try {
      TrialResult t;
      t.n = std::stoull(cells[0]);
      t.trial = std::stoull(cells[1]);
      if (cells[2] == "nan") {
        t.failed = true;
      } else {
        t.radius = std::stod(cells[2]);
      }
      t.converged = cells[3] == "1";
      t.steps = std::stoull(cells[4]);
      t.wall_ms = std::stod(cells[5]);
      out.push_back(t);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Parse, "bad radii row: " + line);
    }
  }
  return out;
}

nlohmann::json summary_json(const ExperimentSpec& spec, const ExperimentResult& result) {
  nlohmann::json j;
  j["spec"] = to_json(spec);
  nlohmann::json per_n = nlohmann::json::array();
  for (const auto& s : result.per_n) {
    per_n.push_back({{"n", s.n}, {"trials", s.trials}, {"converged", s.converged}, {"mean_radius", s.mean},
                     {"min_radius", s.min}, {"max_radius", s.max}});
  }
  j["per_n"] = per_n;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : result.trials) {
    nlohmann::json row = {{"n", t.n},         {"trial", t.trial},       {"radius", t.radius},
                          {"converged", t.converged}, {"steps", t.steps}, {"final_energy", t.final_energy},
                          {"side", t.side},   {"stalled", t.stalled},   {"wall_ms", t.wall_ms},
                          {"energy_increases", t.energy_increases}, {"com_drift", t.com_drift},
                          {"initial_diameter", t.diameter}};
    if (t.failed) row["error"] = t.error;
    trials.push_back(row);
  }
  j["trials"] = trials;
  if (result.regression) {
    const auto& r = *result.regression;
    j["regression"] = {{"slope", r.slope}, {"intercept", r.intercept}, {"r_squared", r.r_squared},
                       {"x", r.x},         {"y", r.y},                 {"residuals", r.residuals}};
  }
  return j;
}

}  // namespace confine
