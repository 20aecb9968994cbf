#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace confine {

/// Value and radial derivative of a kernel at one distance.
struct KernelSample {
  double value;
  double slope;
};

/// Quintic repulsion on [0,1] joined to log(r) beyond r = 1.
class PiecewiseLogKernel {
public:
  static constexpr double kBreak = 1.0;

  static double quintic(double r) {
    return r * (-83.0 / 6.0 + r * (95.0 / 2.0 + r * (-64.0 + r * (239.0 / 6.0 + r * (-19.0 / 2.0)))));
  }
  static double quintic_slope(double r) {
    return -83.0 / 6.0 + r * (95.0 + r * (-192.0 + r * (478.0 / 3.0 + r * (-95.0 / 2.0))));
  }

  double value(double r) const { return r <= kBreak ? quintic(r) : std::log(r); }
  double slope(double r) const { return r <= kBreak ? quintic_slope(r) : 1.0 / r; }
  KernelSample eval(double r) const {
    if (r <= kBreak) return {quintic(r), quintic_slope(r)};
    return {std::log(r), 1.0 / r};
  }
};

/// Cubic-in-(r - e) repulsion on [0,e] joined to log(log r) beyond r = e.
class PiecewiseLogLogKernel {
public:
  static constexpr double kBreak = std::numbers::e;

  static double cubic(double r) {
    constexpr double e = std::numbers::e;
    const double s = r - e;
    return r * s / (e * e) - 2.0 * r * s * s / (e * e * e) + 19.0 / 6.0 * r * s * s * s / (e * e * e * e);
  }
  static double cubic_slope(double r) {
    constexpr double e = std::numbers::e;
    const double s = r - e;
    return (2.0 * r - e) / (e * e) - 2.0 * (s * s + 2.0 * r * s) / (e * e * e) +
           19.0 / 6.0 * (s * s * s + 3.0 * r * s * s) / (e * e * e * e);
  }

  double value(double r) const { return r <= kBreak ? cubic(r) : std::log(std::log(r)); }
  double slope(double r) const { return r <= kBreak ? cubic_slope(r) : 1.0 / (r * std::log(r)); }
  KernelSample eval(double r) const {
    if (r <= kBreak) return {cubic(r), cubic_slope(r)};
    const double lr = std::log(r);
    return {std::log(lr), 1.0 / (r * lr)};
  }
};

/// U(r) = -C_A exp(-r/l_A) + C_R exp(-r/l_R).
class MorseKernel {
public:
  MorseKernel(double c_attract, double l_attract, double c_repulse, double l_repulse);

  double c_attract() const { return ca_; }
  double l_attract() const { return la_; }
  double c_repulse() const { return cr_; }
  double l_repulse() const { return lr_; }

  double value(double r) const { return -ca_ * std::exp(-r * inv_la_) + cr_ * std::exp(-r * inv_lr_); }
  double slope(double r) const {
    return ca_ * inv_la_ * std::exp(-r * inv_la_) - cr_ * inv_lr_ * std::exp(-r * inv_lr_);
  }
  KernelSample eval(double r) const {
    const double ea = std::exp(-r * inv_la_);
    const double er = std::exp(-r * inv_lr_);
    return {-ca_ * ea + cr_ * er, ca_ * inv_la_ * ea - cr_ * inv_lr_ * er};
  }

private:
  double ca_, la_, cr_, lr_;
  double inv_la_, inv_lr_;
};

/// Kernel given by arbitrary callables; used for test kernels and stubs.
class CustomKernel {
public:
  CustomKernel(std::function<double(double)> value, std::function<double(double)> slope)
      : value_(std::move(value)), slope_(std::move(slope)) {}

  double value(double r) const { return value_(r); }
  double slope(double r) const { return slope_(r); }
  KernelSample eval(double r) const { return {value_(r), slope_(r)}; }

private:
  std::function<double(double)> value_;
  std::function<double(double)> slope_;
};

/// Radial interaction potential W(x) = w(|x|) with metadata.
///
/// Immutable after construction. Hot loops should use visit() so the
/// concrete kernel type is resolved once per sweep over particle pairs.
class RadialKernel {
public:
  using Impl = std::variant<PiecewiseLogKernel, PiecewiseLogLogKernel, MorseKernel, CustomKernel>;

  RadialKernel(std::string name, Impl impl, double r_attract, double domain_floor,
               std::vector<double> breakpoints, nlohmann::json params = nlohmann::json::object());

  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }

  double value(double r) const {
    return std::visit([r](const auto& k) { return k.value(r); }, impl_);
  }
  double slope(double r) const {
    return std::visit([r](const auto& k) { return k.slope(r); }, impl_);
  }
  KernelSample eval(double r) const {
    return std::visit([r](const auto& k) { return k.eval(r); }, impl_);
  }

  /// R_a: the slope is non-negative for every r >= r_attract(). May be +inf
  /// when the kernel is repulsive at infinity.
  double r_attract() const { return r_attract_; }
  double domain_floor() const { return domain_floor_; }
  /// Radii at which the analytic branch changes.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  /// Separation beyond which the far-field branch governs the interaction.
  double outer_radius() const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), impl_);
  }

private:
  std::string name_;
  Impl impl_;
  double r_attract_;
  double domain_floor_;
  std::vector<double> breakpoints_;
  nlohmann::json params_;
};

RadialKernel make_piecewise_log();
RadialKernel make_piecewise_loglog();
RadialKernel make_morse(double c_attract, double l_attract, double c_repulse, double l_repulse);
/// r_attract < 0 asks for it to be located numerically from the slope.
RadialKernel make_custom(std::string name, std::function<double(double)> value,
                         std::function<double(double)> slope, double r_attract = -1.0,
                         double domain_floor = 0.0);

/// Kernel lookup by name for configs and the CLI. Recognized names:
/// piecewise_log, piecewise_loglog, morse (C_A, l_A, C_R, l_R).
RadialKernel make_kernel(std::string_view name, const std::map<std::string, double>& params);
RadialKernel make_kernel(const nlohmann::json& spec);

/// Last sign change of slope from negative to non-negative on [lo, hi],
/// located by a scan of `samples` points and bisection to `tol`.
/// Returns 0 when the slope is never negative on the scan.
double locate_attraction_radius(const std::function<double(double)>& slope, double lo, double hi,
                                std::size_t samples = 4096, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Certification of the growth hypotheses on a kernel.

/// Log-spaced radii on [r_min, r_max].
struct ProbeGrid {
  double r_min = 1e-6;
  double r_max = 1e4;
  std::size_t points = 20001;

  std::vector<double> radii() const;
  /// Default probe: r_max = 1e4 * max(1, R_a).
  static ProbeGrid for_kernel(const RadialKernel& k);
};

enum class ConfClass { Satisfies, Borderline, Fails };

std::string_view to_string(ConfClass c);

/// Tail verdict for slope(r) * r^power over the last decade of a probe.
struct TailVerdict {
  ConfClass cls = ConfClass::Fails;
  double limit = 0.0;  // meaningful for Borderline
  double tail_first = 0.0;
  double tail_last = 0.0;
  double tail_min = 0.0;
  double tail_max = 0.0;
};

struct KernelReport {
  std::string kernel;
  int dim = 2;
  double r_attract_estimate = 0.0;
  double c_w = 0.0;
  TailVerdict conf;    // w'(r) r
  TailVerdict w_conf;  // w'(r) r^{1/dim}
  std::optional<double> alpha_integral;  // nullopt: not integrable
  ProbeGrid probe;
};

/// Classifies the tail of g(r) = slope(r) * r^power on the last decade of
/// the probe grid. Thresholds 10, 1e2, 1e3; flat within 1% is borderline.
TailVerdict classify_tail(const RadialKernel& k, const ProbeGrid& probe, double power);

/// C_W: sup of |slope| on (0, R_a]; zero when R_a = 0.
double support_force_bound(const RadialKernel& k, double r_attract);

/// Integral of W over R^dim, or nullopt when |w(r)| r^dim does not decay on the probe.
std::optional<double> kernel_mass_integral(const RadialKernel& k, int dim, const ProbeGrid& probe);

KernelReport certify(const RadialKernel& k, const ProbeGrid& probe, int dim);
inline KernelReport certify(const RadialKernel& k, int dim = 2) {
  return certify(k, ProbeGrid::for_kernel(k), dim);
}

nlohmann::json to_json(const KernelReport& report);

}  // namespace confine
