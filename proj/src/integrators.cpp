#include "confine/integrators.hpp"

#include <cmath>
#include <string>

#include "confine/error.hpp"

namespace confine {

std::string_view to_string(StepMethod m) {
  return m == StepMethod::Rk4 ? "rk4" : "euler_descent";
}

StepMethod parse_step_method(std::string_view s) {
  if (s == "euler_descent" || s == "EULER_DESCENT" || s == "euler") return StepMethod::EulerDescent;
  if (s == "rk4" || s == "RK4") return StepMethod::Rk4;
  throw Error(ErrorCode::InvalidArgument, "unknown stepper method '" + std::string(s) + "'");
}

void StepperConfig::validate() const {
  if (!(dt0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt0 must be positive");
  if (!(dt_min > 0.0 && dt_min <= dt0)) throw Error(ErrorCode::InvalidArgument, "need 0 < dt_min <= dt0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "backtrack factor must lie in (0, 1)");
  }
  if (!(grow_factor > 1.0)) throw Error(ErrorCode::InvalidArgument, "grow factor must exceed 1");
  if (!(stop_threshold_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "stop scale must be positive");
  if (record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  if (!(radius_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius cap must be positive");
}

StepperConfig stepper_from_json(const nlohmann::json& j, StepperConfig cfg) {
  try {
    if (j.contains("method")) cfg.method = parse_step_method(j.at("method").get<std::string>());
    if (j.contains("dt0")) cfg.dt0 = j.at("dt0").get<double>();
    if (j.contains("dt_min")) cfg.dt_min = j.at("dt_min").get<double>();
    if (j.contains("backtrack")) cfg.backtrack_factor = j.at("backtrack").get<double>();
    if (j.contains("grow")) cfg.grow_factor = j.at("grow").get<double>();
    if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps").get<std::size_t>();
    if (j.contains("stop_scale")) cfg.stop_threshold_scale = j.at("stop_scale").get<double>();
    if (j.contains("record_every")) cfg.record_every = j.at("record_every").get<std::size_t>();
    if (j.contains("radius_cap")) cfg.radius_cap = j.at("radius_cap").get<double>();
    if (j.contains("record_dm3dt")) cfg.record_dm3dt = j.at("record_dm3dt").get<bool>();
    if (j.contains("dt0_per_n")) cfg.dt0_per_n = j.at("dt0_per_n").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("stepper config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const StepperConfig& c) {
  return {{"method", std::string(to_string(c.method))},
          {"dt0", c.dt0},
          {"dt_min", c.dt_min},
          {"backtrack", c.backtrack_factor},
          {"grow", c.grow_factor},
          {"max_steps", c.max_steps},
          {"stop_scale", c.stop_threshold_scale},
          {"record_every", c.record_every},
          {"radius_cap", c.radius_cap},
          {"record_dm3dt", c.record_dm3dt},
          {"dt0_per_n", c.dt0_per_n}};
}

namespace {

// out = base + h * v, elementwise over coordinates.
void axpy(const std::vector<double>& base, double h, const std::vector<double>& v, std::vector<double>& out) {
  out.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + h * v[i];
}

ParticleState advanced(const ParticleState& s, double h, const std::vector<double>& v) {
  ParticleState out = s;
  axpy(s.positions(), h, v, out.positions());
  for (double x : out.positions()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NumericOverflow, "particle coordinate overflowed");
  }
  out.set_time(s.time() + h);
  return out;
}

// RK4 increment given k1 = v(state).
ParticleState rk4_from(const ParticleState& state, const std::vector<double>& k1, const RadialKernel& k,
                       double dt, EvalOptions opts) {
  const auto k2 = velocity(advanced(state, 0.5 * dt, k1), k, opts).velocities;
  const auto k3 = velocity(advanced(state, 0.5 * dt, k2), k, opts).velocities;
  const auto k4 = velocity(advanced(state, dt, k3), k, opts).velocities;
  std::vector<double> incr(k1.size());
  for (std::size_t i = 0; i < k1.size(); ++i) incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  return advanced(state, dt, incr);
}

}  // namespace

ParticleState step_euler(const ParticleState& state, const RadialKernel& k, double dt, EvalOptions opts) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be non-negative");
  if (dt == 0.0) return state;
  return advanced(state, dt, velocity(state, k, opts).velocities);
}

ParticleState step_rk4(const ParticleState& state, const RadialKernel& k, double dt, EvalOptions opts) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be non-negative");
  if (dt == 0.0) return state;
  return rk4_from(state, velocity(state, k, opts).velocities, k, dt, opts);
}

RunOutcome run_to_steady(const ParticleState& initial, const RadialKernel& k, const StepperConfig& cfg,
                         EvalOptions opts, const RecordSink& sink) {
  cfg.validate();
  const double threshold = cfg.stop_threshold_scale / static_cast<double>(initial.size());
  const double dt0 = cfg.dt0_per_n ? cfg.dt0 * static_cast<double>(initial.size()) : cfg.dt0;

  RunOutcome out{initial, false, 0, 0, false, 0.0, 0.0, {}};
  ParticleState& state = out.final_state;
  FieldEvaluation current = evaluate(state, k, opts);

  auto record = [&](std::size_t step) {
    DiagnosticsRecord rec = make_record(step, state, current, cfg.record_dm3dt ? &k : nullptr);
    if (sink) sink(rec);
    out.history.push_back(std::move(rec));
  };
  auto check_radius = [&] {
    const double r = radius(state);
    if (!(r <= cfg.radius_cap)) {
      throw Error(ErrorCode::Diverged, "support radius " + std::to_string(r) + " exceeds cap");
    }
  };

  check_radius();
  record(0);
  double dt = dt0;
  std::size_t last_recorded = 0;

  while (current.field.max_speed >= threshold && out.steps < cfg.max_steps) {
    if (cfg.method == StepMethod::EulerDescent) {
      ParticleState trial = advanced(state, dt, current.field.velocities);
      FieldEvaluation next = evaluate(trial, k, opts);
      if (next.energy > current.energy) {
        if (dt > cfg.dt_min) {
          dt = std::max(dt * cfg.backtrack_factor, cfg.dt_min);
          ++out.rejected_steps;
          continue;
        }
        out.stalled = true;
      }
      state = std::move(trial);
      current = std::move(next);
      dt = std::min(dt * cfg.grow_factor, dt0);
    } else {
      state = rk4_from(state, current.field.velocities, k, dt0, opts);
      current = evaluate(state, k, opts);
    }
    ++out.steps;
    check_radius();
    if (out.steps % cfg.record_every == 0) {
      record(out.steps);
      last_recorded = out.steps;
    }
  }

  if (last_recorded != out.steps) record(out.steps);
  out.converged = current.field.max_speed < threshold;
  out.final_max_speed = current.field.max_speed;
  out.final_energy = current.energy;
  return out;
}

}  // namespace confine
