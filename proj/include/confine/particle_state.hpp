#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace confine {

using Point = std::vector<double>;

/// n point masses in R^dim at a given time.
///
/// Positions are stored row-major: particle i occupies
/// positions()[i*dim, (i+1)*dim). Construction validates n >= 1,
/// finite coordinates and masses in [0, 1].
class ParticleState {
public:
  ParticleState(int dim, std::vector<double> positions, std::vector<double> masses, double time = 0.0);

  /// Equal masses 1/n.
  static ParticleState with_equal_masses(int dim, std::vector<double> positions, double time = 0.0);

  int dim() const { return dim_; }
  std::size_t size() const { return masses_.size(); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::span<const double> position(std::size_t i) const {
    return {positions_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<double> position(std::size_t i) {
    return {positions_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& positions() const { return positions_; }
  std::vector<double>& positions() { return positions_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(std::size_t i) const { return masses_[i]; }
  double total_mass() const { return total_mass_; }

  /// Diagonal of the axis-aligned bounding box; an upper bound on the
  /// largest pairwise distance within a factor sqrt(dim).
  double extent() const;
  /// Largest pairwise distance, O(n^2).
  double diameter() const;

  bool operator==(const ParticleState&) const = default;

private:
  int dim_;
  std::vector<double> positions_;
  std::vector<double> masses_;
  double time_;
  double total_mass_;
};

}  // namespace confine
