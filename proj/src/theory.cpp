#include "confine/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>

#include "confine/diagnostics.hpp"
#include "confine/dynamics.hpp"
#include "confine/error.hpp"

namespace confine {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

void require_centered(const ParticleState& state) {
  const Point c = center_of_mass(state);
  const double tol = 1e-10 * state.extent();
  if (!(norm(c) <= tol)) throw Error(ErrorCode::NotCentered, "center of mass is not at the origin");
}

}  // namespace

NeighborhoodPartition partition(const ParticleState& state, std::size_t i, double r_a, double r_cut) {
  if (i >= state.size()) throw Error(ErrorCode::InvalidArgument, "focal index out of range");
  if (!(r_a >= 0.0 && r_a <= r_cut)) throw Error(ErrorCode::InvalidArgument, "need 0 <= r_a <= r_cut");
  const auto xi = state.position(i);
  const double ni = norm(xi);
  if (!(ni > 0.0)) throw Error(ErrorCode::FocalAtOrigin, "half-space needs x_i != 0");

  NeighborhoodPartition p;
  p.focal = i;
  p.r_a = r_a;
  p.r_cut = r_cut;
  p.support_radius = radius_about_origin(state);
  for (std::size_t j = 0; j < state.size(); ++j) {
    const auto xj = state.position(j);
    if (j != i) {
      const double d = distance(xi, xj);
      if (d > 0.0 && d <= r_a) p.near.push_back(j);
      if (d > r_cut) p.far.push_back(j);
    }
    double proj = 0.0;
    for (int c = 0; c < state.dim(); ++c) proj += xj[c] * xi[c];
    if (proj / ni <= 0.5 * p.support_radius) p.half_space.push_back(j);
  }
  return p;
}

OneThirdMass one_third_mass_check(const ParticleState& state, std::span<const double> direction) {
  if (direction.size() != static_cast<std::size_t>(state.dim())) {
    throw Error(ErrorCode::InvalidArgument, "direction has the wrong dimension");
  }
  const double en = norm(direction);
  if (!(en > 0.0)) throw Error(ErrorCode::InvalidArgument, "direction must be non-zero");
  require_centered(state);

  const double half_r = 0.5 * radius_about_origin(state);
  OneThirdMass out;
  out.total_mass = state.total_mass();
  for (std::size_t j = 0; j < state.size(); ++j) {
    const auto x = state.position(j);
    double proj = 0.0;
    for (int c = 0; c < state.dim(); ++c) proj += x[c] * direction[c];
    if (proj / en <= half_r) out.lhs_mass += state.mass(j);
  }
  out.holds = out.lhs_mass >= out.total_mass / 3.0 - 1e-12;
  return out;
}

ClaimRatio claim_ratio_check(const ParticleState& state, std::size_t i, double r_a, double r_cut) {
  if (i >= state.size()) throw Error(ErrorCode::InvalidArgument, "focal index out of range");
  if (!(r_cut >= 2.0 * r_a)) throw Error(ErrorCode::PreconditionRadius, "r_cut must be at least 2 r_a");
  require_centered(state);
  const auto xi = state.position(i);
  const double ni = norm(xi);
  if (!(ni > r_cut)) throw Error(ErrorCode::PreconditionRadius, "focal particle lies inside r_cut");

  ClaimRatio out;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (j == i) continue;
    const auto xj = state.position(j);
    const double d = distance(xi, xj);
    const double weight = state.mass(j) * (ni + norm(xj));
    if (d > 0.0 && d <= r_a) out.t_repulsive += weight;
    if (d > r_cut) out.t_attractive += weight;
  }
  out.ratio_ok = out.t_repulsive <= 4.0 * out.t_attractive + 1e-12;
  return out;
}

ClaimRatio claim_ratio_check(const ParticleState& state, const RadialKernel& k, const KernelReport& report,
                             std::size_t i) {
  const auto r_cut = k1_radius(k, report);
  if (!r_cut) throw Error(ErrorCode::PreconditionRadius, "kernel admits no K1 radius on the probe");
  return claim_ratio_check(state, i, report.r_attract_estimate, *r_cut);
}

double k1_constant(const KernelReport& report) { return 10.0 * report.c_w * report.r_attract_estimate; }

std::optional<double> k1_radius(const RadialKernel& k, const KernelReport& report) {
  const double k1 = k1_constant(report);
  if (!std::isfinite(k1)) return std::nullopt;
  if (report.conf.cls == ConfClass::Fails) return std::nullopt;
  if (report.conf.cls == ConfClass::Borderline && report.conf.limit <= k1) return std::nullopt;

  const auto grid = report.probe.radii();
  const double floor = 2.0 * report.r_attract_estimate;
  std::optional<double> found;
  for (std::size_t idx = grid.size(); idx-- > 0;) {
    const double r = grid[idx];
    if (!(k.slope(r) * r > k1) || !(r > floor)) break;
    found = r;
  }
  return found;
}

std::string state_digest(const ParticleState& state) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t b = 0; b < len; ++b) {
      h ^= bytes[b];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int32_t dim = state.dim();
  feed(&dim, sizeof dim);
  feed(state.positions().data(), state.positions().size() * sizeof(double));
  feed(state.masses().data(), state.masses().size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json theory_report(const ParticleState& raw, const RadialKernel* k, std::size_t directions) {
  const std::string digest = state_digest(raw);
  nlohmann::json checks = nlohmann::json::array();
  auto push = [&](const std::string& name, bool pass, nlohmann::json witness) {
    checks.push_back({{"name", name}, {"inputs_digest", digest}, {"pass", pass}, {"witness", std::move(witness)}});
  };

  const Point com = center_of_mass(raw);
  const ParticleState state = recenter(raw);
  push("recentered", true, {{"original_com", com}});

  // One-third mass over evenly spread directions (dim 2) or coordinate axes.
  {
    double worst = std::numeric_limits<double>::infinity();
    bool pass = true;
    std::vector<double> worst_dir;
    std::vector<std::vector<double>> dirs;
    if (state.dim() == 2) {
      for (std::size_t d = 0; d < directions; ++d) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(d) / static_cast<double>(directions);
        dirs.push_back({std::cos(a), std::sin(a)});
      }
    } else {
      for (int c = 0; c < state.dim(); ++c) {
        for (double s : {1.0, -1.0}) {
          std::vector<double> e(static_cast<std::size_t>(state.dim()), 0.0);
          e[static_cast<std::size_t>(c)] = s;
          dirs.push_back(e);
        }
      }
    }
    for (const auto& e : dirs) {
      const auto r = one_third_mass_check(state, e);
      pass = pass && r.holds;
      const double frac = r.lhs_mass / r.total_mass;
      if (frac < worst) {
        worst = frac;
        worst_dir = e;
      }
    }
    push("one_third_mass", pass, {{"min_fraction", worst}, {"direction", worst_dir}, {"directions", dirs.size()}});
  }

  // T_ij bounds and the two algebraic forms, over all pairs.
  {
    bool pass = true;
    double max_rel_gap = 0.0;
    double min_lower_ratio = std::numeric_limits<double>::infinity();
    double max_upper_ratio = 0.0;
    const double tol = coincidence_tolerance(state);
    for (std::size_t i = 0; i < state.size(); ++i) {
      for (std::size_t j = i + 1; j < state.size(); ++j) {
        const auto xi = state.position(i);
        const auto xj = state.position(j);
        const double d = distance(xi, xj);
        if (!(d > tol)) continue;
        const double t = t_factor(xi, xj);
        const double t2 = t_factor_expanded(xi, xj);
        const double base = (norm(xi) + norm(xj)) * d;
        if (base == 0.0) continue;
        max_rel_gap = std::max(max_rel_gap, std::abs(t - t2) / std::max(std::abs(t2), 1e-300));
        min_lower_ratio = std::min(min_lower_ratio, t / base);
        max_upper_ratio = std::max(max_upper_ratio, t / base);
        pass = pass && t >= 0.5 * base * (1.0 - 1e-12) && t <= base * (1.0 + 1e-12);
      }
    }
    if (!std::isfinite(min_lower_ratio)) min_lower_ratio = 0.5;
    push("t_bounds", pass,
         {{"min_T_over_bound", min_lower_ratio}, {"max_T_over_bound", max_upper_ratio}, {"max_form_rel_gap", max_rel_gap}});
  }

  if (k == nullptr) {
    push("claim_ratio", true, {{"skipped", "no kernel"}});
    return {{"checks", checks}};
  }

  {
    const FieldEvaluation ev = evaluate(state, *k);
    const double pair = dm3dt_pairwise(state, *k);
    const double direct = dm3dt_direct(state, ev.field);
    const double scale = std::max({std::abs(pair), std::abs(direct), 1e-300});
    const double rel = std::abs(pair - direct) / scale;
    double momentum = 0.0;
    for (int c = 0; c < state.dim(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < state.size(); ++i) s += state.mass(i) * ev.field.at(i)[c];
      momentum = std::max(momentum, std::abs(s));
    }
    push("dm3dt_identity", rel <= 1e-10 || std::abs(pair - direct) <= 1e-14,
         {{"pairwise", pair}, {"direct", direct}, {"rel_diff", rel}});
    push("momentum", momentum <= 1e-12 * std::max(ev.field.max_speed, 1.0) * state.total_mass(),
         {{"max_component", momentum}, {"max_speed", ev.field.max_speed}});
  }

  {
    const KernelReport rep = certify(*k, state.dim());
    const auto r_cut = k1_radius(*k, rep);
    if (!r_cut) {
      push("claim_ratio", true,
           {{"skipped", "no K1 radius on the probe"}, {"K1", k1_constant(rep)}, {"conf_class", to_string(rep.conf.cls)}});
    } else {
      bool pass = true;
      std::size_t tested = 0;
      double worst = 0.0;
      for (std::size_t i = 0; i < state.size(); ++i) {
        if (!(norm(state.position(i)) > *r_cut)) continue;
        const auto c = claim_ratio_check(state, i, rep.r_attract_estimate, *r_cut);
        ++tested;
        pass = pass && c.ratio_ok;
        if (c.t_attractive > 0.0) worst = std::max(worst, c.t_repulsive / c.t_attractive);
        else if (c.t_repulsive > 0.0) worst = std::numeric_limits<double>::infinity();
      }
      push("claim_ratio", pass,
           {{"r_cut", *r_cut}, {"K1", k1_constant(rep)}, {"tested", tested},
            {"max_ratio", std::isfinite(worst) ? nlohmann::json(worst) : nlohmann::json("inf")}});
    }
  }
  return {{"checks", checks}};
}

}  // namespace confine
