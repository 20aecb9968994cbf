#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "confine/diagnostics.hpp"
#include "confine/dynamics.hpp"

namespace confine {

enum class StepMethod { EulerDescent, Rk4 };

std::string_view to_string(StepMethod m);
StepMethod parse_step_method(std::string_view s);

struct StepperConfig {
  StepMethod method = StepMethod::EulerDescent;
  double dt0 = 0.1;
  double dt_min = 1e-8;
  double backtrack_factor = 0.5;
  double grow_factor = 1.1;
  std::size_t max_steps = 5'000'000;
  double stop_threshold_scale = 1e-3;  // threshold is stop_threshold_scale / n
  std::size_t record_every = 1000;
  double radius_cap = 1e6;
  bool record_dm3dt = false;
  bool dt0_per_n = false;  // effective dt0 is dt0 * n; velocities scale like 1/n

  void validate() const;
};

/// Keys: method, dt0, dt_min, backtrack, grow, max_steps, stop_scale,
/// record_every, radius_cap, record_dm3dt, dt0_per_n. Missing keys keep
/// defaults.
StepperConfig stepper_from_json(const nlohmann::json& j, StepperConfig base = {});
nlohmann::json to_json(const StepperConfig& cfg);

struct RunOutcome {
  ParticleState final_state;
  bool converged = false;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  bool stalled = false;  // some step was accepted at dt_min with rising energy
  double final_max_speed = 0.0;
  double final_energy = 0.0;
  std::vector<DiagnosticsRecord> history;
};

/// x_i <- x_i + dt v_i; time advances by dt.
ParticleState step_euler(const ParticleState& state, const RadialKernel& k, double dt, EvalOptions opts = {});

/// Classical four-stage Runge-Kutta step of the particle ODE.
ParticleState step_rk4(const ParticleState& state, const RadialKernel& k, double dt, EvalOptions opts = {});

using RecordSink = std::function<void(const DiagnosticsRecord&)>;

/// Steps until the l-infinity norm of the velocity field drops below
/// cfg.stop_threshold_scale / n or max_steps accepted steps are taken.
///
/// EulerDescent rejects any step that raises the energy, shrinking dt by
/// backtrack_factor (not below dt_min; a step at dt_min is accepted and
/// flags the run as stalled); accepted steps grow dt by grow_factor up to
/// dt0. Rk4 uses the fixed step dt0.
///
/// Throws Error(Diverged) when the support radius exceeds cfg.radius_cap.
RunOutcome run_to_steady(const ParticleState& initial, const RadialKernel& k, const StepperConfig& cfg,
                         EvalOptions opts = {}, const RecordSink& sink = {});

}  // namespace confine
