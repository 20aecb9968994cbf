#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>

#include "confine/dynamics.hpp"

namespace confine {

struct DiagnosticsRecord {
  std::size_t step = 0;
  double time = 0.0;
  double energy = 0.0;
  double radius = 0.0;
  double m3 = 0.0;
  Point com;
  double max_speed = 0.0;
  std::optional<double> dm3dt;
};

/// Support radius about the instantaneous center of mass.
double radius(const ParticleState& state);

/// max_i |x_i| about the coordinate origin.
double radius_about_origin(const ParticleState& state);

/// M3 = sum_i m_i |x_i|^3 about the coordinate origin.
double third_moment(const ParticleState& state);

/// T_ij = (x_i - x_j)/|x_i - x_j| . (x_i |x_i| - x_j |x_j|).
double t_factor(std::span<const double> xi, std::span<const double> xj);

/// (|x_i| + |x_j|) (|x_i| - |x_j|)^2 / 2 + |x_i - x_j|^2 / 2) / |x_i - x_j|;
/// algebraically equal to t_factor.
double t_factor_expanded(std::span<const double> xi, std::span<const double> xj);

/// dM3/dt = -3/2 sum_i sum_{j != i} m_i m_j w'(|x_i - x_j|) T_ij, skipping
/// coincident pairs.
double dm3dt_pairwise(const ParticleState& state, const RadialKernel& k);

/// dM3/dt = 3 sum_i m_i |x_i| <v_i, x_i> from an evaluated velocity field.
double dm3dt_direct(const ParticleState& state, const VelocityField& field);

DiagnosticsRecord make_record(std::size_t step, const ParticleState& state, const FieldEvaluation& eval,
                              const RadialKernel* k_for_dm3dt = nullptr);

/// Header: step,time,energy,radius,m3,max_speed[,dm3dt]
void write_csv_header(std::ostream& os, bool with_dm3dt);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& rec, bool with_dm3dt);

}  // namespace confine
