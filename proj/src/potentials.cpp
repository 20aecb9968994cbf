#include "confine/potentials.hpp"

#include <algorithm>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "confine/error.hpp"

namespace confine {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NumericOverflow: return "NUMERIC_OVERFLOW";
    case ErrorCode::ZeroMass: return "ZERO_MASS";
    case ErrorCode::Diverged: return "DIVERGED";
    case ErrorCode::CoincidentPoints: return "COINCIDENT_POINTS";
    case ErrorCode::FocalAtOrigin: return "FOCAL_AT_ORIGIN";
    case ErrorCode::NotCentered: return "NOT_CENTERED";
    case ErrorCode::PreconditionRadius: return "PRECONDITION_RADIUS";
    case ErrorCode::RejectionExhausted: return "REJECTION_EXHAUSTED";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::NotIntegrable: return "NOT_INTEGRABLE";
    case ErrorCode::Parse: return "PARSE";
  }
  return "UNKNOWN";
}

std::string_view to_string(ConfClass c) {
  switch (c) {
    case ConfClass::Satisfies: return "SATISFIES";
    case ConfClass::Borderline: return "BORDERLINE";
    case ConfClass::Fails: return "FAILS";
  }
  return "UNKNOWN";
}

MorseKernel::MorseKernel(double c_attract, double l_attract, double c_repulse, double l_repulse)
    : ca_(c_attract), la_(l_attract), cr_(c_repulse), lr_(l_repulse),
      inv_la_(1.0 / l_attract), inv_lr_(1.0 / l_repulse) {
  if (!(ca_ > 0 && la_ > 0 && cr_ > 0 && lr_ > 0)) {
    throw Error(ErrorCode::InvalidArgument, "Morse parameters must all be positive");
  }
}

RadialKernel::RadialKernel(std::string name, Impl impl, double r_attract, double domain_floor,
                           std::vector<double> breakpoints, nlohmann::json params)
    : name_(std::move(name)), impl_(std::move(impl)), r_attract_(r_attract),
      domain_floor_(domain_floor), breakpoints_(std::move(breakpoints)), params_(std::move(params)) {}

double RadialKernel::outer_radius() const {
  if (!breakpoints_.empty()) return breakpoints_.back();
  return std::isfinite(r_attract_) ? r_attract_ : 0.0;
}

double locate_attraction_radius(const std::function<double(double)>& slope, double lo, double hi,
                                std::size_t samples, double tol) {
  if (samples < 2) samples = 2;
  std::size_t last_negative = samples;
  double step = (hi - lo) / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    if (slope(lo + step * static_cast<double>(i)) < 0.0) last_negative = i;
  }
  if (last_negative == samples) return 0.0;
  if (last_negative == samples - 1) return std::numeric_limits<double>::infinity();
  double a = lo + step * static_cast<double>(last_negative);
  double b = lo + step * static_cast<double>(last_negative + 1);
  while (b - a > tol) {
    double mid = 0.5 * (a + b);
    if (slope(mid) < 0.0) a = mid; else b = mid;
  }
  return b;
}

RadialKernel make_piecewise_log() {
  static const double r_attract = locate_attraction_radius(
      [](double r) { return PiecewiseLogKernel::quintic_slope(r); }, 0.0, PiecewiseLogKernel::kBreak);
  return RadialKernel("piecewise_log", PiecewiseLogKernel{}, r_attract, 0.0, {PiecewiseLogKernel::kBreak});
}

RadialKernel make_piecewise_loglog() {
  static const double r_attract = locate_attraction_radius(
      [](double r) { return PiecewiseLogLogKernel::cubic_slope(r); }, 0.0, PiecewiseLogLogKernel::kBreak);
  return RadialKernel("piecewise_loglog", PiecewiseLogLogKernel{}, r_attract, 0.0,
                      {PiecewiseLogLogKernel::kBreak});
}

RadialKernel make_morse(double c_attract, double l_attract, double c_repulse, double l_repulse) {
  MorseKernel m(c_attract, l_attract, c_repulse, l_repulse);
  double r_attract = 0.0;
  if (c_repulse / l_repulse > c_attract / l_attract) {
    // slope(0) < 0; grow the bracket until the slope turns non-negative.
    double hi = std::max(l_attract, l_repulse);
    while (m.slope(hi) < 0.0 && hi < 1e6) hi *= 2.0;
    if (m.slope(hi) < 0.0) {
      r_attract = std::numeric_limits<double>::infinity();
    } else {
      double lo = 0.0;
      while (hi - lo > 1e-13 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        if (m.slope(mid) < 0.0) lo = mid; else hi = mid;
      }
      r_attract = hi;
    }
  }
  nlohmann::json params = {{"C_A", c_attract}, {"l_A", l_attract}, {"C_R", c_repulse}, {"l_R", l_repulse}};
  return RadialKernel("morse", m, r_attract, 0.0, {}, std::move(params));
}

RadialKernel make_custom(std::string name, std::function<double(double)> value,
                         std::function<double(double)> slope, double r_attract, double domain_floor) {
  if (r_attract < 0.0) {
    double lo = std::max(domain_floor, 1e-12);
    r_attract = locate_attraction_radius(slope, lo, 1e3, 1 << 16);
  }
  return RadialKernel(std::move(name), CustomKernel(std::move(value), std::move(slope)), r_attract,
                      domain_floor, {});
}

RadialKernel make_kernel(std::string_view name, const std::map<std::string, double>& params) {
  auto param = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto allow = [&](std::initializer_list<std::string_view> keys) {
    for (const auto& [key, v] : params) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + key + "' for kernel " + std::string(name));
      }
    }
  };
  if (name == "piecewise_log" || name == "log") {
    allow({});
    return make_piecewise_log();
  }
  if (name == "piecewise_loglog" || name == "loglog") {
    allow({});
    return make_piecewise_loglog();
  }
  if (name == "morse") {
    allow({"C_A", "l_A", "C_R", "l_R"});
    return make_morse(param("C_A", 1.0), param("l_A", 1.0), param("C_R", 1.9), param("l_R", 0.8));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

RadialKernel make_kernel(const nlohmann::json& spec) {
  if (spec.is_string()) return make_kernel(spec.get<std::string>(), {});
  std::map<std::string, double> params;
  if (spec.contains("params")) {
    for (const auto& [key, val] : spec.at("params").items()) params[key] = val.get<double>();
  }
  return make_kernel(spec.at("name").get<std::string>(), params);
}

// ---------------------------------------------------------------------------

std::vector<double> ProbeGrid::radii() const {
  if (!(r_min > 0.0 && r_max > r_min && points >= 2)) {
    throw Error(ErrorCode::InvalidArgument, "probe grid needs 0 < r_min < r_max and >= 2 points");
  }
  std::vector<double> out(points);
  const double lmin = std::log(r_min);
  const double lstep = (std::log(r_max) - lmin) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = std::exp(lmin + lstep * static_cast<double>(i));
  out.front() = r_min;
  out.back() = r_max;
  return out;
}

ProbeGrid ProbeGrid::for_kernel(const RadialKernel& k) {
  const double ra = std::isfinite(k.r_attract()) ? k.r_attract() : 1.0;
  const double scale = std::max(1.0, ra);
  ProbeGrid g;
  g.r_min = std::max(k.domain_floor(), 1e-6 * scale);
  if (g.r_min == k.domain_floor() && g.r_min > 0.0) g.r_min *= 1.0 + 1e-9;
  g.r_max = 1e4 * scale;
  g.points = 20001;
  return g;
}

namespace {

constexpr double kFlatTolerance = 0.01;
constexpr double kThresholds[] = {10.0, 100.0, 1000.0};

}  // namespace

TailVerdict classify_tail(const RadialKernel& k, const ProbeGrid& probe, double power) {
  const auto grid = probe.radii();
  const double decade_start = probe.r_max / 10.0;
  std::vector<double> g;
  for (double r : grid) {
    if (r >= decade_start) g.push_back(k.slope(r) * std::pow(r, power));
  }
  TailVerdict v;
  if (g.empty()) return v;
  v.tail_first = g.front();
  v.tail_last = g.back();
  v.tail_min = *std::min_element(g.begin(), g.end());
  v.tail_max = *std::max_element(g.begin(), g.end());

  bool non_decreasing = true;
  bool non_increasing = true;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] < g[i - 1]) non_decreasing = false;
    if (g[i] > g[i - 1]) non_increasing = false;
  }

  if (v.tail_min >= kThresholds[2]) {
    v.cls = ConfClass::Satisfies;
    return v;
  }
  if (v.tail_min <= 0.0 || std::max(std::abs(v.tail_min), std::abs(v.tail_max)) < 1e-12) {
    v.cls = ConfClass::Fails;  // repulsive or vanishing attraction
    return v;
  }
  if ((v.tail_max - v.tail_min) < kFlatTolerance * v.tail_max) {
    v.cls = ConfClass::Borderline;
    v.limit = v.tail_last;
    return v;
  }
  if (non_decreasing) {
    // monotone growth crossing every threshold in turn
    bool crossed = true;
    for (double t : kThresholds) crossed = crossed && v.tail_last > t;
    if (crossed) {
      v.cls = ConfClass::Satisfies;
      return v;
    }
    v.cls = ConfClass::Borderline;
    v.limit = v.tail_last;
    return v;
  }
  if (non_increasing) {
    v.cls = ConfClass::Fails;
    return v;
  }
  v.cls = ConfClass::Borderline;
  v.limit = v.tail_last;
  return v;
}

double support_force_bound(const RadialKernel& k, double r_attract) {
  if (!(r_attract > 0.0)) return 0.0;
  if (!std::isfinite(r_attract)) return std::numeric_limits<double>::infinity();
  constexpr std::size_t kPoints = 100000;
  ProbeGrid grid{std::max(1e-8 * r_attract, k.domain_floor() * (1.0 + 1e-9)), r_attract, kPoints};
  double best = 0.0;
  if (grid.r_min < grid.r_max) {
    for (double r : grid.radii()) best = std::max(best, std::abs(k.slope(r)));
  } else {
    best = std::abs(k.slope(r_attract));
  }
  if (k.domain_floor() == 0.0) best = std::max(best, std::abs(k.slope(0.0)));
  return best;
}

std::optional<double> kernel_mass_integral(const RadialKernel& k, int dim, const ProbeGrid& probe) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const double r_end = probe.r_max;
  const double tail_end = std::abs(k.value(r_end)) * std::pow(r_end, dim);
  const double tail_mid = std::abs(k.value(r_end / 10.0)) * std::pow(r_end / 10.0, dim);
  if (!std::isfinite(tail_end) || tail_end > 1e-10 || tail_end > tail_mid) return std::nullopt;

  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double r) {
    double v = k.value(r);
    return v == 0.0 ? 0.0 : v * std::pow(r, dim - 1);
  };
  std::vector<double> cuts{k.domain_floor()};
  for (double b : k.breakpoints()) {
    if (b > cuts.back()) cuts.push_back(b);
  }
  // Split at the kernel's length scale so the finite pieces resolve the core.
  const double scale = std::isfinite(k.r_attract()) && k.r_attract() > 0.0 ? k.r_attract() : 1.0;
  for (double c : {scale, 10.0 * scale}) {
    if (c > cuts.back()) cuts.push_back(c);
  }
  double radial = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    radial += gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 15, 1e-15);
  }
  radial += gauss_kronrod<double, 61>::integrate(integrand, cuts.back(),
                                                  std::numeric_limits<double>::infinity(), 15, 1e-15);
  // Surface area of the unit sphere in R^dim.
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
  return sphere * radial;
}

KernelReport certify(const RadialKernel& k, const ProbeGrid& probe, int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  KernelReport rep;
  rep.kernel = k.name();
  rep.dim = dim;
  rep.probe = probe;

  // R_a: last negative-to-nonnegative sign change of the slope on the probe.
  const auto grid = probe.radii();
  std::size_t last_negative = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (k.slope(grid[i]) < 0.0) last_negative = i;
  }
  if (last_negative == grid.size()) {
    rep.r_attract_estimate = 0.0;
  } else if (last_negative + 1 == grid.size()) {
    rep.r_attract_estimate = std::numeric_limits<double>::infinity();
  } else {
    double a = grid[last_negative];
    double b = grid[last_negative + 1];
    while (b - a > 1e-13 * b) {
      double mid = 0.5 * (a + b);
      if (k.slope(mid) < 0.0) a = mid; else b = mid;
    }
    rep.r_attract_estimate = b;
  }

  rep.c_w = support_force_bound(k, rep.r_attract_estimate);
  rep.conf = classify_tail(k, probe, 1.0);
  rep.w_conf = classify_tail(k, probe, 1.0 / dim);
  rep.alpha_integral = kernel_mass_integral(k, dim, probe);
  return rep;
}

nlohmann::json to_json(const KernelReport& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["kernel"] = r.kernel;
  j["dim"] = r.dim;
  j["r_attract"] = num(r.r_attract_estimate);
  j["c_w"] = num(r.c_w);
  j["conf_class"] = std::string(to_string(r.conf.cls));
  j["conf_limit"] = r.conf.cls == ConfClass::Borderline ? num(r.conf.limit) : nlohmann::json(nullptr);
  j["conf_tail_min"] = num(r.conf.tail_min);
  j["conf_tail_max"] = num(r.conf.tail_max);
  j["w_conf_class"] = std::string(to_string(r.w_conf.cls));
  j["w_conf_limit"] = r.w_conf.cls == ConfClass::Borderline ? num(r.w_conf.limit) : nlohmann::json(nullptr);
  if (r.alpha_integral) {
    j["alpha_integral"] = num(*r.alpha_integral);
  } else {
    j["alpha_integral"] = "NOT_INTEGRABLE";
  }
  j["probe_r_min"] = r.probe.r_min;
  j["probe_r_max"] = r.probe.r_max;
  j["probe_points"] = r.probe.points;
  return j;
}

}  // namespace confine
