#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "confine/particle_state.hpp"
#include "confine/potentials.hpp"

namespace confine {

/// Controls how the O(n^2) pair sums are evaluated.
///
/// threads == 1 visits each unordered pair once in ascending (i, j) order
/// and applies the antisymmetric force to both ends. threads > 1 splits the
/// outer index across threads and sums every row independently in
/// ascending j; that mode is also deterministic for any thread count but
/// differs from the single-threaded path at the roundoff level.
struct EvalOptions {
  unsigned threads = 1;
};

struct VelocityField {
  std::vector<double> velocities;  // row-major, n * dim
  int dim = 2;
  double max_speed = 0.0;

  std::span<const double> at(std::size_t i) const {
    return {velocities.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::size_t size() const { return dim > 0 ? velocities.size() / static_cast<std::size_t>(dim) : 0; }
};

struct FieldEvaluation {
  VelocityField field;
  double energy = 0.0;
};

/// Pairs closer than this are treated as coincident and dropped from every
/// pair sum: 1e-14 * (1 + extent of the configuration).
double coincidence_tolerance(const ParticleState& state);

/// v_i = -sum_{j != i} m_j w'(|x_i - x_j|) (x_i - x_j) / |x_i - x_j|.
VelocityField velocity(const ParticleState& state, const RadialKernel& k, EvalOptions opts = {});

/// E = 1/2 sum_i sum_{j != i} m_i m_j w(|x_i - x_j|).
double energy(const ParticleState& state, const RadialKernel& k, EvalOptions opts = {});

/// Velocity and energy from a single pass over the pairs.
FieldEvaluation evaluate(const ParticleState& state, const RadialKernel& k, EvalOptions opts = {});

Point center_of_mass(const ParticleState& state);

/// Translates the configuration so its center of mass is at the origin.
ParticleState recenter(const ParticleState& state);

}  // namespace confine
