#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "confine/error.hpp"
#include "confine/format.hpp"
#include "confine/harness.hpp"
#include "confine/io.hpp"
#include "confine/theory.hpp"

namespace {

using namespace confine;

constexpr int kUsage = 1;
constexpr int kNumeric = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  bool deterministic = false;
  unsigned threads = 1;
};

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidArgument, "expected key=value, got " + item);
    try {
      std::size_t used = 0;
      const std::string v = item.substr(eq + 1);
      params[item.substr(0, eq)] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "not a number: " + item);
    }
  }
  return params;
}

bool is_snapshot_json(const nlohmann::json& j) { return j.is_object() && j.contains("positions"); }

// `run` accepts a config (kernel, stepper, and either a snapshot path or n
// plus init) or a snapshot file directly.
int cmd_run(const std::string& path, const std::string& kernel_name, const std::vector<std::string>& kparams,
            const Globals& g) {
  nlohmann::json cfg = nlohmann::json::object();
  std::optional<ParticleState> initial;
  std::string stored_kernel;
  const bool csv = std::filesystem::path(path).extension() == ".csv";
  if (csv) {
    initial = load_snapshot(path);
  } else {
    const nlohmann::json doc = read_json_file(path);
    if (is_snapshot_json(doc)) {
      initial = snapshot_from_json(doc);
      stored_kernel = doc.value("kernel", std::string());
    } else {
      cfg = doc;
    }
  }

  nlohmann::json kernel_json = cfg.value("kernel", nlohmann::json{{"name", "piecewise_log"}});
  if (!stored_kernel.empty()) kernel_json = {{"name", stored_kernel}};
  if (!kernel_name.empty()) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, v] : parse_params(kparams)) params[key] = v;
    kernel_json = {{"name", kernel_name}, {"params", params}};
  }
  const RadialKernel k = make_kernel(kernel_json);
  const StepperConfig stepper = cfg.contains("stepper") ? stepper_from_json(cfg.at("stepper")) : StepperConfig{};
  stepper.validate();

  if (!initial && cfg.contains("snapshot")) {
    std::filesystem::path snap = cfg.at("snapshot").get<std::string>();
    if (snap.is_relative()) snap = std::filesystem::path(path).parent_path() / snap;
    initial = load_snapshot(snap.string());
  }
  if (!initial) {
    ExperimentSpec spec;
    if (!cfg.contains("n_values") && cfg.contains("n")) cfg["n_values"] = {cfg.at("n")};
    spec = experiment_from_json(cfg);
    if (g.seed) spec.init.seed = *g.seed;
    InitSpec init = spec.init;
    const std::size_t n = spec.n_values.front();
    if (!spec.side_given) init.side = default_side(k, n);
    CounterRng rng(derive_seed(init.seed, n, cfg.value("trial", std::size_t{0})));
    initial = generate_initial(n, spec.dim, init, k.outer_radius(), rng);
  }

  write_csv_header(std::cout, stepper.record_dm3dt);
  const RunOutcome out = run_to_steady(*initial, k, stepper, EvalOptions{g.threads}, [&](const DiagnosticsRecord& r) {
    write_csv_row(std::cout, r, stepper.record_dm3dt);
  });
  std::cout.flush();
  std::cerr << "converged=" << (out.converged ? "true" : "false") << " steps=" << out.steps
            << " rejected=" << out.rejected_steps << " radius=" << fmt17(radius(out.final_state))
            << " energy=" << fmt17(out.final_energy) << " max_speed=" << fmt17(out.final_max_speed)
            << (out.stalled ? " stalled" : "") << '\n';
  if (!g.out.empty()) {
    std::filesystem::create_directories(g.out);
    std::ostringstream snap;
    write_snapshot_csv(snap, out.final_state);
    write_text_file(g.out + "/final_state.csv", snap.str());
  }
  return 0;
}

int cmd_sweep(const std::string& path, const Globals& g) {
  ExperimentSpec spec = experiment_from_json(read_json_file(path));
  if (g.seed) spec.init.seed = *g.seed;
  if (!g.out.empty()) spec.outputs = g.out;
  RunOptions opts;
  opts.concurrent_trials = g.threads;
  opts.deterministic = g.deterministic;
  opts.progress = &std::cerr;
  const ExperimentResult result = run_experiment(spec, opts);
  std::cout << summary_json(spec, result).dump(2) << '\n';
  for (const auto& t : result.trials) {
    if (t.failed) return kNumeric;
  }
  return 0;
}

int cmd_check_kernel(const std::string& name, const std::vector<std::string>& kparams, int dim) {
  const RadialKernel k = make_kernel(name, parse_params(kparams));
  std::cout << to_json(certify(k, dim)).dump(2) << '\n';
  return 0;
}

int cmd_theory_check(const std::string& path, const std::string& kernel_name, const std::vector<std::string>& kparams) {
  std::string stored;
  const ParticleState state = load_snapshot(path, &stored);
  std::optional<RadialKernel> k;
  if (!kernel_name.empty()) {
    k = make_kernel(kernel_name, parse_params(kparams));
  } else if (!stored.empty()) {
    k = make_kernel(stored, {});
  }
  std::cout << theory_report(state, k ? &*k : nullptr).dump(2) << '\n';
  return 0;
}

int cmd_regress(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  ExperimentResult result;
  result.trials = read_radii_csv(in);
  result.per_n = summarize(result.trials);
  const RegressionFit fit = regress_radius_squared(result);
  std::cout << nlohmann::json{{"slope", fit.slope},         {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
                              {"n", fit.x},                 {"radius_squared", fit.y},    {"residuals", fit.residuals}}
                   .dump(2)
            << '\n';
  return 0;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
      return kUsage;
    default:
      return kNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle aggregation simulator and experiment harness"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed, overrides init.seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--deterministic", g.deterministic, "Write byte-reproducible outputs (wall_ms = 0)");
  app.add_option("--threads", g.threads, "Worker threads (pair sweep for run, concurrent trials for sweep)")
      ->check(CLI::Range(1u, 1024u));

  // Global flags are also accepted after the subcommand.
  app.fallthrough();

  std::string path, name, kernel_name;
  std::vector<std::string> kparams;
  int dim = 2;

  auto* run = app.add_subcommand("run", "Relax one configuration, streaming diagnostics CSV to stdout");
  run->add_option("config", path, "Run config JSON or snapshot (.csv/.json)")->required();
  run->add_option("--kernel", kernel_name, "Kernel name, overrides the config");
  run->add_option("params", kparams, "Kernel parameters key=value");

  auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep over n and trials");
  sweep->add_option("config", path, "Experiment config JSON")->required();

  auto* check = app.add_subcommand("check-kernel", "Certify a kernel and print the JSON report");
  check->add_option("name", name, "piecewise_log, piecewise_loglog or morse")->required();
  check->add_option("params", kparams, "Kernel parameters key=value");
  check->add_option("--dim", dim, "Dimension for the mass integral")->check(CLI::Range(1, 16));

  auto* theory = app.add_subcommand("theory-check", "Run the structural checks on a snapshot");
  theory->add_option("snapshot", path, "Snapshot (.csv/.json)")->required();
  theory->add_option("--kernel", kernel_name, "Kernel for the kernel-dependent checks");
  theory->add_option("params", kparams, "Kernel parameters key=value");

  auto* regress = app.add_subcommand("regress", "Fit radius^2 against n from a radii table");
  regress->add_option("radii", path, "radii.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*run) return cmd_run(path, kernel_name, kparams, g);
    if (*sweep) return cmd_sweep(path, g);
    if (*check) return cmd_check_kernel(name, kparams, dim);
    if (*theory) return cmd_theory_check(path, kernel_name, kparams);
    if (*regress) return cmd_regress(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
