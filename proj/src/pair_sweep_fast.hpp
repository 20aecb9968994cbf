#pragma once

#include <cstddef>

namespace confine::detail {

/// Kernel formula selector for the vectorized 2-D sweep.
enum class FastKernel { PiecewiseLog, PiecewiseLogLog, Morse };

struct FastKernelParams {
  FastKernel kind;
  double ca = 0, inv_la = 0, cr = 0, inv_lr = 0;  // Morse only
};

constexpr std::size_t kSweepBlock = 512;

/// One row of the symmetric pair sweep in 2-D, pairs (i, j) for j > i.
/// Adds -m_j F_ij to v_i and +m_i F_ij to v_j, and writes one partial energy
/// sum (of m_j w(r_ij), not yet scaled by m_i) per block of kSweepBlock
/// columns into block_energy. Pairs with r^2 <= tol2 are skipped.
///
/// Compiled with relaxed floating-point rules so the kernel formulas and
/// reductions vectorize; the result is deterministic for a given build.
/// Inputs must be finite.
void sweep_row_2d(const FastKernelParams& k, std::size_t i, std::size_t n, const double* xs, const double* ys,
                  const double* m, double tol2, double* vx, double* vy, double* block_energy, bool want_energy,
                  bool want_velocity);

}  // namespace confine::detail
