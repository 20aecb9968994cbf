#include "confine/particle_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confine/error.hpp"

namespace confine {

ParticleState::ParticleState(int dim, std::vector<double> positions, std::vector<double> masses, double time)
    : dim_(dim), positions_(std::move(positions)), masses_(std::move(masses)), time_(time), total_mass_(0.0) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (masses_.empty()) throw Error(ErrorCode::InvalidArgument, "a state needs at least one particle");
  if (positions_.size() != masses_.size() * static_cast<std::size_t>(dim_)) {
    throw Error(ErrorCode::InvalidArgument, "positions size does not match n * dim");
  }
  if (!(time_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "time must be >= 0");
  for (double x : positions_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NumericOverflow, "non-finite particle coordinate");
  }
  for (double m : masses_) {
    if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::InvalidArgument, "masses must lie in [0, 1]");
    total_mass_ += m;
  }
}

ParticleState ParticleState::with_equal_masses(int dim, std::vector<double> positions, double time) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const std::size_t n = positions.size() / static_cast<std::size_t>(dim);
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "a state needs at least one particle");
  std::vector<double> masses(n, 1.0 / static_cast<double>(n));
  return ParticleState(dim, std::move(positions), std::move(masses), time);
}

double ParticleState::extent() const {
  double sum = 0.0;
  for (int d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      lo = std::min(lo, positions_[i * dim_ + d]);
      hi = std::max(hi, positions_[i * dim_ + d]);
    }
    sum += (hi - lo) * (hi - lo);
  }
  return std::sqrt(sum);
}

double ParticleState::diameter() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      double s = 0.0;
      for (int d = 0; d < dim_; ++d) {
        double diff = positions_[i * dim_ + d] - positions_[j * dim_ + d];
        s += diff * diff;
      }
      best = std::max(best, s);
    }
  }
  return std::sqrt(best);
}

}  // namespace confine
