#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "confine/integrators.hpp"
#include "confine/rng.hpp"

namespace confine {

struct InitSpec {
  std::string shape = "centered_square";
  double side = 3.0;
  bool min_far_pair = true;
  std::uint64_t seed = 1;
};

/// Side used when a config omits one: 3 for piecewise_log, 2e for
/// piecewise_loglog, sqrt(n) l_A for H-stable Morse (C l^2 > 1) and 2 for
/// catastrophic Morse.
double default_side(const RadialKernel& k, std::size_t n);

/// n uniform points in the centered square (cube) of the given side,
/// masses 1/n, recentered to zero center of mass. With min_far_pair the
/// whole configuration is redrawn until some pair is farther apart than
/// far_distance; RejectionExhausted after 1e4 draws.
ParticleState generate_initial(std::size_t n, int dim, const InitSpec& init, double far_distance, CounterRng& rng);

struct ExperimentSpec {
  nlohmann::json kernel = {{"name", "piecewise_log"}};
  int dim = 2;
  std::vector<std::size_t> n_values;
  std::size_t trials_per_n = 5;
  InitSpec init;
  bool side_given = false;
  StepperConfig stepper;
  std::string outputs;
  bool regression = false;
  bool snapshots = false;
  bool diagnostics = false;

  void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

struct TrialResult {
  std::size_t n = 0;
  std::size_t trial = 0;
  double radius = 0.0;
  bool converged = false;
  std::size_t steps = 0;
  double wall_ms = 0.0;
  double final_energy = 0.0;
  double side = 0.0;
  bool stalled = false;
  std::size_t energy_increases = 0;  // recorded steps whose energy rose
  double com_drift = 0.0;            // |CoM(final) - CoM(initial)|
  double diameter = 0.0;             // of the initial configuration
  bool failed = false;
  std::string error;

  bool operator==(const TrialResult&) const = default;
};

struct RadiusSummary {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> residuals;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  // sorted by (n, trial)
  std::vector<RadiusSummary> per_n;
  std::optional<RegressionFit> regression;
};

/// Ordinary least squares y = intercept + slope x. Degenerate when fewer
/// than two distinct x.
RegressionFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of (mean steady radius)^2 against n over the per-n summaries.
RegressionFit regress_radius_squared(const ExperimentResult& result);

std::vector<RadiusSummary> summarize(const std::vector<TrialResult>& trials);

struct RunOptions {
  unsigned concurrent_trials = 1;
  bool deterministic = true;
  bool write_outputs = true;
  std::ostream* progress = nullptr;
};

/// Generates, relaxes and measures every (n, trial). Per-trial failures
/// (Diverged, NumericOverflow, RejectionExhausted) are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});

/// radii.csv: n,trial,radius,converged,steps,wall_ms. With
/// zero_wall_time the wall_ms column is written as 0 so the file is
/// byte-reproducible.
void write_radii_csv(std::ostream& os, const std::vector<TrialResult>& trials, bool zero_wall_time);
std::vector<TrialResult> read_radii_csv(std::istream& is);

nlohmann::json summary_json(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace confine
