#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "confine/particle_state.hpp"
#include "confine/potentials.hpp"

namespace confine {

/// Index sets around a focal particle i:
///   near       0 < |x_j - x_i| <= r_a
///   far        |x_j - x_i| > r_cut
///   half_space x_j . e_i <= R/2, e_i = x_i/|x_i|, R = max_j |x_j|
struct NeighborhoodPartition {
  std::size_t focal = 0;
  double r_a = 0.0;
  double r_cut = 0.0;
  double support_radius = 0.0;  // R used for half_space
  std::vector<std::size_t> near;
  std::vector<std::size_t> far;
  std::vector<std::size_t> half_space;
};

/// Throws FocalAtOrigin when x_i = 0 (e_i undefined).
NeighborhoodPartition partition(const ParticleState& state, std::size_t i, double r_a, double r_cut);

struct OneThirdMass {
  double lhs_mass = 0.0;    // mass with x_j . e <= R/2
  double total_mass = 0.0;
  bool holds = false;
};

/// Mass in the half-space {x . e <= R/2}; needs a centered state
/// (|center of mass| <= 1e-10 * extent), else NotCentered.
OneThirdMass one_third_mass_check(const ParticleState& state, std::span<const double> direction);

struct ClaimRatio {
  double t_repulsive = 0.0;  // sum over near of m_j (|x_i| + |x_j|)
  double t_attractive = 0.0; // sum over far of m_j (|x_i| + |x_j|)
  bool ratio_ok = false;     // t_repulsive <= 4 t_attractive + 1e-12
};

/// Needs a centered state, r_cut >= 2 r_a and |x_i| > r_cut
/// (PreconditionRadius otherwise).
ClaimRatio claim_ratio_check(const ParticleState& state, std::size_t i, double r_a, double r_cut);

/// Same with r_a and r_cut = k1_radius derived from the kernel report.
ClaimRatio claim_ratio_check(const ParticleState& state, const RadialKernel& k, const KernelReport& report,
                             std::size_t i);

/// K1 = 10 C_W R_a.
double k1_constant(const KernelReport& report);

/// Smallest probe radius r > 2 R_a with w'(rho) rho > K1 for every probe
/// rho >= r, or nullopt when the tail verdict rules that out.
std::optional<double> k1_radius(const RadialKernel& k, const KernelReport& report);

/// FNV-1a over dim, positions and masses; hex string.
std::string state_digest(const ParticleState& state);

/// Runs the structural checks on a snapshot and returns
/// {"checks": [{name, inputs_digest, pass, witness}, ...]}.
/// Kernel-dependent checks are skipped when k is null.
nlohmann::json theory_report(const ParticleState& state, const RadialKernel* k, std::size_t directions = 64);

}  // namespace confine
