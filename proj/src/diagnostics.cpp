#include "confine/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "confine/error.hpp"
#include "confine/format.hpp"
#include "confine/summation.hpp"

namespace confine {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

}  // namespace

double radius(const ParticleState& state) {
  const Point c = center_of_mass(state);
  double best = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto x = state.position(i);
    double s = 0.0;
    for (int d = 0; d < state.dim(); ++d) s += (x[d] - c[d]) * (x[d] - c[d]);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double radius_about_origin(const ParticleState& state) {
  double best = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) best = std::max(best, norm(state.position(i)));
  return best;
}

double third_moment(const ParticleState& state) {
  CompensatedSum s;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double r = norm(state.position(i));
    s.add(state.mass(i) * r * r * r);
  }
  return s.value();
}

double t_factor(std::span<const double> xi, std::span<const double> xj) {
  if (xi.size() != xj.size()) throw Error(ErrorCode::InvalidArgument, "point dimensions differ");
  const double ni = norm(xi);
  const double nj = norm(xj);
  double dist2 = 0.0;
  double dot = 0.0;
  for (std::size_t c = 0; c < xi.size(); ++c) {
    const double d = xi[c] - xj[c];
    dist2 += d * d;
    dot += d * (xi[c] * ni - xj[c] * nj);
  }
  if (!(dist2 > 0.0)) throw Error(ErrorCode::CoincidentPoints, "T_ij needs distinct points");
  return dot / std::sqrt(dist2);
}

double t_factor_expanded(std::span<const double> xi, std::span<const double> xj) {
  if (xi.size() != xj.size()) throw Error(ErrorCode::InvalidArgument, "point dimensions differ");
  const double ni = norm(xi);
  const double nj = norm(xj);
  double dist2 = 0.0;
  for (std::size_t c = 0; c < xi.size(); ++c) dist2 += (xi[c] - xj[c]) * (xi[c] - xj[c]);
  if (!(dist2 > 0.0)) throw Error(ErrorCode::CoincidentPoints, "T_ij needs distinct points");
  const double dn = ni - nj;
  return (ni + nj) * (0.5 * dn * dn + 0.5 * dist2) / std::sqrt(dist2);
}

double dm3dt_pairwise(const ParticleState& state, const RadialKernel& k) {
  const double tol = coincidence_tolerance(state);
  const std::size_t n = state.size();
  CompensatedSum s;
  // Both ordered pairs contribute identically (w' and T_ij are symmetric).
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = state.position(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xj = state.position(j);
      double r2 = 0.0;
      for (int c = 0; c < state.dim(); ++c) r2 += (xi[c] - xj[c]) * (xi[c] - xj[c]);
      if (!(r2 > tol * tol)) continue;
      const double w1 = k.slope(std::sqrt(r2));
      if (w1 == 0.0) continue;
      s.add(state.mass(i) * state.mass(j) * w1 * t_factor(xi, xj));
    }
  }
  return -3.0 * s.value();
}

double dm3dt_direct(const ParticleState& state, const VelocityField& field) {
  CompensatedSum s;
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto x = state.position(i);
    auto v = field.at(i);
    double dot = 0.0;
    for (int c = 0; c < state.dim(); ++c) dot += v[c] * x[c];
    s.add(state.mass(i) * norm(x) * dot);
  }
  return 3.0 * s.value();
}

DiagnosticsRecord make_record(std::size_t step, const ParticleState& state, const FieldEvaluation& eval,
                              const RadialKernel* k_for_dm3dt) {
  DiagnosticsRecord rec;
  rec.step = step;
  rec.time = state.time();
  rec.energy = eval.energy;
  rec.com = center_of_mass(state);
  rec.radius = radius(state);
  rec.m3 = third_moment(state);
  rec.max_speed = eval.field.max_speed;
  if (k_for_dm3dt) rec.dm3dt = dm3dt_pairwise(state, *k_for_dm3dt);
  return rec;
}

void write_csv_header(std::ostream& os, bool with_dm3dt) {
  os << "step,time,energy,radius,m3,max_speed";
  if (with_dm3dt) os << ",dm3dt";
  os << '\n';
}

void write_csv_row(std::ostream& os, const DiagnosticsRecord& rec, bool with_dm3dt) {
  os << rec.step << ',' << fmt17(rec.time) << ',' << fmt17(rec.energy) << ',' << fmt17(rec.radius) << ','
     << fmt17(rec.m3) << ',' << fmt17(rec.max_speed);
  if (with_dm3dt) os << ',' << (rec.dm3dt ? fmt17(*rec.dm3dt) : std::string());
  os << '\n';
}

}  // namespace confine
