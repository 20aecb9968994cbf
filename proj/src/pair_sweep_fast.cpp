// Built with relaxed floating-point flags (see src/CMakeLists.txt). Keep this
// file free of inline functions shared with other translation units.
#include "pair_sweep_fast.hpp"

#include <algorithm>
#include <cmath>

namespace confine::detail {

namespace {

constexpr double kE = 2.718281828459045;

// Each block writes w(r) and w'(r)/r given r and 1/r. The far-field
// logarithms are skipped when no pair in the block reaches that branch.

void log_block(const double* r, const double* inv, double* w, double* f, std::size_t cnt) {
  double rmax = 0.0;
  for (std::size_t t = 0; t < cnt; ++t) {
    const double x = r[t];
    w[t] = x * (-83.0 / 6.0 + x * (95.0 / 2.0 + x * (-64.0 + x * (239.0 / 6.0 + x * (-19.0 / 2.0)))));
    f[t] = (-83.0 / 6.0 + x * (95.0 + x * (-192.0 + x * (478.0 / 3.0 + x * (-95.0 / 2.0))))) * inv[t];
    rmax = std::max(rmax, x);
  }
  if (rmax <= 1.0) return;
  for (std::size_t t = 0; t < cnt; ++t) {
    const bool inner = r[t] <= 1.0;
    const double lg = std::log(r[t]);
    w[t] = inner ? w[t] : lg;
    f[t] = inner ? f[t] : inv[t] * inv[t];
  }
}

void loglog_block(const double* r, const double* inv, double* w, double* f, std::size_t cnt) {
  constexpr double e2 = kE * kE;
  constexpr double e3 = e2 * kE;
  constexpr double e4 = e3 * kE;
  double rmax = 0.0;
  for (std::size_t t = 0; t < cnt; ++t) {
    const double x = r[t];
    const double d = x - kE;
    w[t] = x * d / e2 - 2.0 * x * d * d / e3 + 19.0 / 6.0 * x * d * d * d / e4;
    f[t] = ((2.0 * x - kE) / e2 - 2.0 * (d * d + 2.0 * x * d) / e3 + 19.0 / 6.0 * (d * d * d + 3.0 * x * d * d) / e4) *
           inv[t];
    rmax = std::max(rmax, x);
  }
  if (rmax <= kE) return;
  for (std::size_t t = 0; t < cnt; ++t) {
    const bool inner = r[t] <= kE;
    const double lg = std::log(std::max(r[t], kE));
    w[t] = inner ? w[t] : std::log(lg);
    f[t] = inner ? f[t] : inv[t] * inv[t] / lg;
  }
}

void morse_block(const FastKernelParams& k, const double* r, const double* inv, double* w, double* f,
                 std::size_t cnt) {
  const double ca = k.ca, cr = k.cr, ia = k.inv_la, ir = k.inv_lr;
  for (std::size_t t = 0; t < cnt; ++t) {
    const double ea = std::exp(-r[t] * ia);
    const double er = std::exp(-r[t] * ir);
    w[t] = -ca * ea + cr * er;
    f[t] = (ca * ia * ea - cr * ir * er) * inv[t];
  }
}

}  // namespace

void sweep_row_2d(const FastKernelParams& k, std::size_t i, std::size_t n, const double* xs, const double* ys,
                  const double* m, double tol2, double* vx, double* vy, double* block_energy, bool want_energy,
                  bool want_velocity) {
  alignas(64) double dx[kSweepBlock];
  alignas(64) double dy[kSweepBlock];
  alignas(64) double r[kSweepBlock];
  alignas(64) double inv[kSweepBlock];
  alignas(64) double keep[kSweepBlock];
  alignas(64) double w[kSweepBlock];
  alignas(64) double f[kSweepBlock];

  const double xi = xs[i];
  const double yi = ys[i];
  const double mi = m[i];
  double ax = 0.0;
  double ay = 0.0;
  std::size_t blk = 0;
  for (std::size_t j0 = i + 1; j0 < n; j0 += kSweepBlock, ++blk) {
    const std::size_t cnt = std::min(kSweepBlock, n - j0);
    const double* xj = xs + j0;
    const double* yj = ys + j0;
    const double* mj = m + j0;
    for (std::size_t t = 0; t < cnt; ++t) {
      dx[t] = xi - xj[t];
      dy[t] = yi - yj[t];
      const double r2 = dx[t] * dx[t] + dy[t] * dy[t];
      const bool ok = r2 > tol2;
      keep[t] = ok ? 1.0 : 0.0;
      r[t] = ok ? std::sqrt(r2) : 1.0;
      inv[t] = 1.0 / r[t];
    }
    switch (k.kind) {
      case FastKernel::PiecewiseLog: log_block(r, inv, w, f, cnt); break;
      case FastKernel::PiecewiseLogLog: loglog_block(r, inv, w, f, cnt); break;
      case FastKernel::Morse: morse_block(k, r, inv, w, f, cnt); break;
    }
    if (want_velocity) {
      double* vxj = vx + j0;
      double* vyj = vy + j0;
      for (std::size_t t = 0; t < cnt; ++t) {
        const double fk = keep[t] * f[t];
        const double fx = fk * dx[t];
        const double fy = fk * dy[t];
        ax -= mj[t] * fx;
        ay -= mj[t] * fy;
        vxj[t] += mi * fx;
        vyj[t] += mi * fy;
      }
    }
    if (want_energy) {
      double e = 0.0;
      for (std::size_t t = 0; t < cnt; ++t) e += keep[t] * mj[t] * w[t];
      block_energy[blk] = e;
    }
  }
  if (want_velocity) {
    vx[i] += ax;
    vy[i] += ay;
  }
}

}  // namespace confine::detail
