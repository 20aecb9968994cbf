#include "confine/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>
#include <type_traits>

#include "confine/error.hpp"
#include "confine/summation.hpp"
#include "pair_sweep_fast.hpp"

namespace confine {

namespace {

enum Want : unsigned { kVelocity = 1u, kEnergy = 2u };

struct PairData {
  const double* x;
  const double* m;
  std::size_t n;
  double tol2;
};

// Displacement x_i - x_j and its squared length.
template <int D>
inline double separation(const double* xi, const double* xj, int dim, double* d) {
  if constexpr (D > 0) {
    double s = 0.0;
    for (int c = 0; c < D; ++c) {
      d[c] = xi[c] - xj[c];
      s += d[c] * d[c];
    }
    return s;
  } else {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
      d[c] = xi[c] - xj[c];
      s += d[c] * d[c];
    }
    return s;
  }
}

// Each unordered pair once, ascending (i, j); force applied to both ends.
template <int D, unsigned W, class K>
bool sweep_symmetric(const PairData& p, int dim, const K& k, double* v, CompensatedSum& energy) {
  const int dd = D > 0 ? D : dim;
  std::vector<double> dbuf(static_cast<std::size_t>(dd));
  double* d = dbuf.data();
  bool finite = true;
  for (std::size_t i = 0; i < p.n; ++i) {
    const double* xi = p.x + i * dd;
    const double mi = p.m[i];
    double* vi = v + i * dd;
    CompensatedSum row;
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const double* xj = p.x + j * dd;
      const double r2 = separation<D>(xi, xj, dd, d);
      if (!(r2 > p.tol2)) {
        if (!std::isfinite(r2)) finite = false;
        continue;
      }
      const double r = std::sqrt(r2);
      if constexpr ((W & kVelocity) && (W & kEnergy)) {
        const KernelSample s = k.eval(r);
        row.add(p.m[j] * s.value);
        const double f = s.slope / r;
        if (!std::isfinite(f) || !std::isfinite(s.value)) finite = false;
        for (int c = 0; c < dd; ++c) {
          const double fc = f * d[c];
          vi[c] -= p.m[j] * fc;
          v[j * dd + c] += mi * fc;
        }
      } else if constexpr (W & kVelocity) {
        const double f = k.slope(r) / r;
        if (!std::isfinite(f)) finite = false;
        for (int c = 0; c < dd; ++c) {
          const double fc = f * d[c];
          vi[c] -= p.m[j] * fc;
          v[j * dd + c] += mi * fc;
        }
      } else {
        const double w = k.value(r);
        if (!std::isfinite(w)) finite = false;
        row.add(p.m[j] * w);
      }
    }
    if constexpr ((W & kEnergy) != 0) energy.add(mi * row.value());
  }
  return finite;
}

// Row i summed over all j in ascending order; rows are independent.
template <int D, unsigned W, class K>
bool sweep_rows(const PairData& p, int dim, const K& k, std::size_t begin, std::size_t end, double* v,
                double* row_energy) {
  const int dd = D > 0 ? D : dim;
  std::vector<double> dbuf(static_cast<std::size_t>(dd));
  double* d = dbuf.data();
  bool finite = true;
  for (std::size_t i = begin; i < end; ++i) {
    const double* xi = p.x + i * dd;
    double* vi = v + i * dd;
    CompensatedSum row;
    for (std::size_t j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const double r2 = separation<D>(xi, p.x + j * dd, dd, d);
      if (!(r2 > p.tol2)) {
        if (!std::isfinite(r2)) finite = false;
        continue;
      }
      const double r = std::sqrt(r2);
      double slope = 0.0;
      if constexpr ((W & kVelocity) && (W & kEnergy)) {
        const KernelSample s = k.eval(r);
        row.add(p.m[j] * s.value);
        slope = s.slope;
        if (!std::isfinite(s.value)) finite = false;
      } else if constexpr (W & kVelocity) {
        slope = k.slope(r);
      } else {
        const double w = k.value(r);
        if (!std::isfinite(w)) finite = false;
        row.add(p.m[j] * w);
      }
      if constexpr ((W & kVelocity) != 0) {
        const double f = slope / r;
        if (!std::isfinite(f)) finite = false;
        for (int c = 0; c < dd; ++c) vi[c] -= p.m[j] * f * d[c];
      }
    }
    if constexpr ((W & kEnergy) != 0) row_energy[i] = 0.5 * p.m[i] * row.value();
  }
  return finite;
}

std::optional<detail::FastKernelParams> fast_params(const RadialKernel& kernel) {
  using detail::FastKernel;
  return kernel.visit([](const auto& k) -> std::optional<detail::FastKernelParams> {
    using K = std::decay_t<decltype(k)>;
    if constexpr (std::is_same_v<K, PiecewiseLogKernel>) {
      return detail::FastKernelParams{FastKernel::PiecewiseLog};
    } else if constexpr (std::is_same_v<K, PiecewiseLogLogKernel>) {
      return detail::FastKernelParams{FastKernel::PiecewiseLogLog};
    } else if constexpr (std::is_same_v<K, MorseKernel>) {
      return detail::FastKernelParams{FastKernel::Morse, k.c_attract(), 1.0 / k.l_attract(), k.c_repulse(),
                                      1.0 / k.l_repulse()};
    } else {
      return std::nullopt;
    }
  });
}

// Vectorized single-threaded path for the built-in kernels in 2-D.
template <unsigned W>
void run_fast_2d(const ParticleState& state, const detail::FastKernelParams& fk, double tol2, FieldEvaluation& out) {
  const std::size_t n = state.size();
  std::vector<double> xs(n), ys(n), vx(n, 0.0), vy(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = state.positions()[2 * i];
    ys[i] = state.positions()[2 * i + 1];
  }
  std::vector<double> blocks((n + detail::kSweepBlock - 1) / detail::kSweepBlock + 1, 0.0);
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    detail::sweep_row_2d(fk, i, n, xs.data(), ys.data(), state.masses().data(), tol2, vx.data(), vy.data(),
                         blocks.data(), (W & kEnergy) != 0, (W & kVelocity) != 0);
    if constexpr ((W & kEnergy) != 0) {
      CompensatedSum row;
      const std::size_t nblk = (n - i - 1 + detail::kSweepBlock - 1) / detail::kSweepBlock;
      for (std::size_t b = 0; b < nblk; ++b) row.add(blocks[b]);
      total.add(state.mass(i) * row.value());
    }
  }
  out.energy = total.value();
  if constexpr ((W & kVelocity) != 0) {
    for (std::size_t i = 0; i < n; ++i) {
      out.field.velocities[2 * i] = vx[i];
      out.field.velocities[2 * i + 1] = vy[i];
    }
  }
}

// Scalar path: any kernel, any dimension, optionally threaded by rows.
template <unsigned W>
bool run_generic(const PairData& p, int dim, const RadialKernel& kernel, unsigned threads, FieldEvaluation& out) {
  double* v = out.field.velocities.data();
  return kernel.visit([&](const auto& k) {
    if (threads == 1) {
      CompensatedSum e;
      const bool finite =
          dim == 2 ? sweep_symmetric<2, W>(p, dim, k, v, e) : sweep_symmetric<0, W>(p, dim, k, v, e);
      out.energy = e.value();
      return finite;
    }
    std::vector<double> rows(p.n, 0.0);
    std::atomic<bool> ok{true};
    std::vector<std::thread> pool;
    const std::size_t chunk = (p.n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(p.n, b + chunk);
      if (b >= e) break;
      pool.emplace_back([&, b, e] {
        const bool f = dim == 2 ? sweep_rows<2, W>(p, dim, k, b, e, v, rows.data())
                                : sweep_rows<0, W>(p, dim, k, b, e, v, rows.data());
        if (!f) ok = false;
      });
    }
    for (auto& th : pool) th.join();
    CompensatedSum e;
    for (double r : rows) e.add(r);
    out.energy = e.value();
    return ok.load();
  });
}

template <unsigned W>
FieldEvaluation run_sweep(const ParticleState& state, const RadialKernel& kernel, EvalOptions opts) {
  const std::size_t n = state.size();
  const int dim = state.dim();
  const double tol = coincidence_tolerance(state);
  PairData p{state.positions().data(), state.masses().data(), n, tol * tol};

  FieldEvaluation out;
  out.field.dim = dim;
  out.field.velocities.assign(n * static_cast<std::size_t>(dim), 0.0);
  const double* v = out.field.velocities.data();

  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n)));
  bool finite = true;

  // Squared distances must stay finite for the relaxed-arithmetic path.
  const auto fast = fast_params(kernel);
  if (threads == 1 && dim == 2 && fast && state.extent() < 1e150) {
    run_fast_2d<W>(state, *fast, p.tol2, out);
    finite = std::isfinite(out.energy);
    for (double x : out.field.velocities) finite = finite && std::isfinite(x);
  } else {
    finite = run_generic<W>(p, dim, kernel, threads, out);
  }

  if (!finite) throw Error(ErrorCode::NumericOverflow, "non-finite pair interaction in " + kernel.name());

  if constexpr ((W & kVelocity) != 0) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += v[i * dim + c] * v[i * dim + c];
      best = std::max(best, s);
    }
    out.field.max_speed = std::sqrt(best);
  }
  return out;
}

}  // namespace

double coincidence_tolerance(const ParticleState& state) { return 1e-14 * (1.0 + state.extent()); }

VelocityField velocity(const ParticleState& state, const RadialKernel& k, EvalOptions opts) {
  return run_sweep<kVelocity>(state, k, opts).field;
}

double energy(const ParticleState& state, const RadialKernel& k, EvalOptions opts) {
  return run_sweep<kEnergy>(state, k, opts).energy;
}

FieldEvaluation evaluate(const ParticleState& state, const RadialKernel& k, EvalOptions opts) {
  return run_sweep<kVelocity | kEnergy>(state, k, opts);
}

Point center_of_mass(const ParticleState& state) {
  const double total = state.total_mass();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMass, "center of mass of a massless state");
  Point c(static_cast<std::size_t>(state.dim()), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto x = state.position(i);
    for (int d = 0; d < state.dim(); ++d) c[d] += state.mass(i) * x[d];
  }
  for (double& x : c) x /= total;
  return c;
}

ParticleState recenter(const ParticleState& state) {
  const Point c = center_of_mass(state);
  ParticleState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto x = out.position(i);
    for (int d = 0; d < out.dim(); ++d) x[d] -= c[d];
  }
  return out;
}

}  // namespace confine
