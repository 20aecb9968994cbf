#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "confine/error.hpp"
#include "confine/potentials.hpp"

using namespace confine;

namespace {

constexpr double kE = std::numbers::e;

// Exact rational evaluation of the quintic at r = p/q, returned as a double
// only at the end: sum of c_k r^k with c = {0, -83/6, 95/2, -64, 239/6, -19/2}.
double quintic_rational(long long p, long long q) {
  // Common denominator 6 q^5.
  const long long q2 = q * q, q3 = q2 * q, q4 = q3 * q, q5 = q4 * q;
  const long long p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p;
  const long long num = -83 * p * q4 + 285 * p2 * q3 - 384 * p3 * q2 + 239 * p4 * q - 57 * p5;
  return static_cast<double>(num) / static_cast<double>(6 * q5);
}

double centered_difference(const RadialKernel& k, double r) {
  const double h = 1e-6 * std::max(1.0, r);
  return (k.value(r + h) - k.value(r - h)) / (2.0 * h);
}

double alpha_closed_form(double ca, double la, double cr, double lr) {
  return 2.0 * std::numbers::pi * (cr * lr * lr - ca * la * la);
}

}  // namespace

TEST_CASE("piecewise log values at the joints and inside the quintic") {
  const RadialKernel k = make_piecewise_log();
  CHECK(std::abs(k.value(1.0)) <= 1e-14);
  CHECK(k.value(2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(k.value(0.5) == doctest::Approx(-163.0 / 192.0).epsilon(1e-14));
  CHECK(k.value(0.5) == doctest::Approx(quintic_rational(1, 2)).epsilon(1e-14));
  CHECK(k.value(0.25) == doctest::Approx(quintic_rational(1, 4)).epsilon(1e-14));
  CHECK(k.value(1e-300) == doctest::Approx(0.0));
  CHECK(k.domain_floor() == 0.0);
}

TEST_CASE("piecewise log slope matches 1/r at the joint") {
  const RadialKernel k = make_piecewise_log();
  CHECK(k.slope(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(k.slope(1.0 + 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("piecewise loglog values and slope at e") {
  const RadialKernel k = make_piecewise_loglog();
  CHECK(std::abs(k.value(kE)) < 1e-15);
  CHECK(k.value(0.0) == 0.0);
  CHECK(k.slope(kE) == doctest::Approx(1.0 / kE).epsilon(1e-14));
  CHECK(k.slope(kE * (1 + 1e-12)) == doctest::Approx(1.0 / kE).epsilon(1e-9));
  CHECK(k.value(std::exp(kE)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("morse closed forms at the origin") {
  const RadialKernel h = make_morse(1, 1, 1.9, 0.8);
  CHECK(h.value(0.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(h.slope(0.0) == doctest::Approx(1.0 - 1.9 / 0.8).epsilon(1e-15));
  CHECK(h.slope(0.0) < 0.0);
}

TEST_CASE("morse attraction radius is the slope root") {
  const RadialKernel c = make_morse(1, 1, 1.3, 0.2);
  CHECK(c.r_attract() == doctest::Approx(std::log(6.5) / 4.0).epsilon(1e-10));
  const RadialKernel h = make_morse(1, 1, 1.9, 0.8);
  CHECK(h.r_attract() == doctest::Approx(std::log(1.9 / 0.8) / 0.25).epsilon(1e-10));
  // Attractive everywhere when C_R/l_R <= C_A/l_A.
  CHECK(make_morse(1, 1, 0.5, 1.0).r_attract() == 0.0);
}

TEST_CASE("attraction radius of the quintic") {
  const RadialKernel k = make_piecewise_log();
  const double ra = k.r_attract();
  CHECK(ra > 0.0);
  CHECK(ra < 1.0);
  CHECK(std::abs(PiecewiseLogKernel::quintic_slope(ra)) < 1e-9);
  CHECK(PiecewiseLogKernel::quintic_slope(ra * (1 - 1e-6)) < 0.0);
  CHECK(PiecewiseLogKernel::quintic_slope(ra * (1 + 1e-6)) > 0.0);
}

TEST_CASE("branch continuity of value and slope") {
  for (const RadialKernel& k : {make_piecewise_log(), make_piecewise_loglog()}) {
    for (double b : k.breakpoints()) {
      const double eps = 1e-6 * b;
      CAPTURE(k.name());
      CHECK(std::abs(k.value(b - eps) - k.value(b + eps)) <= 1e-9 + 2.0 * eps * std::abs(k.slope(b)));
      // a jump in w' would show up in the straddling difference but not in the one-sided ones
      const double one_sided = std::abs(k.slope(b - eps) - k.slope(b - 2 * eps)) +
                               std::abs(k.slope(b + 2 * eps) - k.slope(b + eps));
      CHECK(std::abs(k.slope(b - eps) - k.slope(b + eps)) <= 1e-9 + 1.01 * one_sided);
    }
  }
}

// The breakpoint derivatives below were worked out by hand from the branch
// formulas; both kernels turn out to be C^3 at their joint.
TEST_CASE("third-order smoothness at the joints") {
  SUBCASE("quintic against log r at 1") {
    const double d2_quintic = 95.0 - 384.0 + 478.0 - 190.0;
    const double d3_quintic = -384.0 + 956.0 - 570.0;
    CHECK(d2_quintic == doctest::Approx(-1.0));  // (log r)'' = -1/r^2
    CHECK(d3_quintic == doctest::Approx(2.0));   // (log r)''' = 2/r^3
  }
  SUBCASE("cubic against log log r at e") {
    // In s = r - e the cubic is s/e - s^2/e^2 + (7/6) s^3/e^3 + (19/6) s^4/e^4.
    const double d2_cubic = -2.0 / (kE * kE);
    const double d3_cubic = 7.0 / (kE * kE * kE);
    // g = r log r; (1/g)'' = -g'/g^2 + ..., evaluated with g = e, g' = 2, g'' = 1/e.
    const double d2_loglog = -2.0 / (kE * kE);
    const double d3_loglog = -(1.0 / kE) / (kE * kE) + 2.0 * 4.0 / (kE * kE * kE);
    CHECK(d2_cubic == doctest::Approx(d2_loglog));
    CHECK(d3_cubic == doctest::Approx(d3_loglog));
  }
  SUBCASE("numerical second difference agrees across the joint") {
    for (const RadialKernel& k : {make_piecewise_log(), make_piecewise_loglog()}) {
      const double b = k.breakpoints().front();
      const double h = 1e-4;
      const double left = (k.slope(b - h) - k.slope(b - 2 * h)) / h;
      const double right = (k.slope(b + 2 * h) - k.slope(b + h)) / h;
      CHECK(left == doctest::Approx(right).epsilon(1e-3));
    }
  }
}

TEST_CASE("slope agrees with a centered difference of value") {
  std::mt19937_64 gen(7);
  struct Branch {
    RadialKernel k;
    double lo, hi;
  };
  const std::vector<Branch> branches = {
      {make_piecewise_log(), 1e-3, 1.0 - 1e-4},   {make_piecewise_log(), 1.0 + 1e-4, 50.0},
      {make_piecewise_loglog(), 1e-3, kE - 1e-4}, {make_piecewise_loglog(), kE + 1e-4, 60.0},
      {make_morse(1, 1, 1.9, 0.8), 1e-3, 40.0},  {make_morse(1, 1, 1.3, 0.2), 1e-3, 20.0},
  };
  for (const auto& br : branches) {
    std::uniform_real_distribution<double> u(br.lo, br.hi);
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      const double r = u(gen);
      const double s = br.k.slope(r);
      if (std::abs(s - centered_difference(br.k, r)) > 1e-6 * (1.0 + std::abs(s))) ++bad;
    }
    CAPTURE(br.k.name());
    CAPTURE(br.lo);
    CHECK(bad == 0);
  }
}

TEST_CASE("certify classifies the built-in kernels") {
  const KernelReport log = certify(make_piecewise_log());
  CHECK(log.conf.cls == ConfClass::Borderline);
  CHECK(log.conf.limit == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(log.alpha_integral.has_value());

  const KernelReport loglog = certify(make_piecewise_loglog());
  CHECK(loglog.conf.cls == ConfClass::Fails);
  CHECK_FALSE(loglog.alpha_integral.has_value());

  const KernelReport h = certify(make_morse(1, 1, 1.9, 0.8));
  CHECK(h.conf.cls == ConfClass::Fails);
  REQUIRE(h.alpha_integral.has_value());
  CHECK(*h.alpha_integral == doctest::Approx(alpha_closed_form(1, 1, 1.9, 0.8)).epsilon(1e-9));
  CHECK(*h.alpha_integral == doctest::Approx(1.357).epsilon(1e-3));

  const KernelReport c = certify(make_morse(1, 1, 1.3, 0.2));
  CHECK(c.conf.cls == ConfClass::Fails);
  REQUIRE(c.alpha_integral.has_value());
  CHECK(std::abs(*c.alpha_integral - alpha_closed_form(1, 1, 1.3, 0.2)) < 1e-8);
  CHECK(*c.alpha_integral == doctest::Approx(-5.956).epsilon(1e-3));
}

TEST_CASE("C_W is the largest repulsive slope magnitude") {
  const RadialKernel k = make_piecewise_log();
  const KernelReport rep = certify(k);
  CHECK(rep.c_w >= 0.0);
  // Dense independent scan of |w'| on (0, R_a].
  double best = std::abs(k.slope(0.0));
  for (int t = 1; t <= 200000; ++t) best = std::max(best, std::abs(k.slope(rep.r_attract_estimate * t / 200000.0)));
  CHECK(rep.c_w == doctest::Approx(best).epsilon(1e-6));
  CHECK(rep.c_w == doctest::Approx(83.0 / 6.0).epsilon(1e-9));

  const RadialKernel morse = make_morse(1, 1, 1.9, 0.8);
  CHECK(certify(morse).c_w == doctest::Approx(1.375).epsilon(1e-9));
}

TEST_CASE("C_W vanishes when R_a is zero") {
  const RadialKernel quad = make_custom("quadratic", [](double r) { return 0.5 * r * r; }, [](double r) { return r; });
  const KernelReport rep = certify(quad);
  CHECK(rep.r_attract_estimate == 0.0);
  CHECK(rep.c_w == 0.0);
  CHECK(rep.conf.cls == ConfClass::Satisfies);
}

TEST_CASE("tail classifier on synthetic growth laws") {
  auto custom = [](std::function<double(double)> slope) {
    return make_custom("synthetic", [](double) { return 0.0; }, std::move(slope), 0.0);
  };
  CHECK(certify(custom([](double r) { return std::sqrt(r); })).conf.cls == ConfClass::Satisfies);
  CHECK(certify(custom([](double r) { return 3.0 / r; })).conf.cls == ConfClass::Borderline);
  CHECK(certify(custom([](double r) { return 3.0 / r; })).conf.limit == doctest::Approx(3.0));
  CHECK(certify(custom([](double r) { return 1.0 / (r * r); })).conf.cls == ConfClass::Fails);
  CHECK(certify(custom([](double r) { return -1.0 / r; })).conf.cls == ConfClass::Fails);
  // w' r^{1/2} for w' = 1/sqrt(r) is flat: borderline in the weighted sense.
  const KernelReport w = certify(custom([](double r) { return 1.0 / std::sqrt(r); }), 2);
  CHECK(w.w_conf.cls == ConfClass::Borderline);
  CHECK(w.conf.tail_last > w.conf.tail_first);
}

TEST_CASE("attractivity beyond R_a on the probe") {
  for (const RadialKernel& k : {make_piecewise_log(), make_piecewise_loglog(), make_morse(1, 1, 1.9, 0.8),
                                make_morse(1, 1, 1.3, 0.2)}) {
    const KernelReport rep = certify(k);
    int bad = 0;
    for (double r : rep.probe.radii()) {
      if (r > rep.r_attract_estimate && k.slope(r) < -1e-12) ++bad;
    }
    CAPTURE(k.name());
    CHECK(bad == 0);
  }
}

TEST_CASE("alpha sign follows C l^2 against 1") {
  // C > 1, l < 1 with C_A = l_A = 1.
  const std::vector<std::pair<double, double>> grid = {{1.3, 0.2}, {1.9, 0.8}, {1.5, 0.9}, {2.0, 0.6}, {3.0, 0.5},
                                                       {1.2, 0.95}, {4.0, 0.45}, {1.1, 0.5}, {5.0, 0.3}, {2.5, 0.7}};
  for (auto [c, l] : grid) {
    const KernelReport rep = certify(make_morse(1, 1, c, l));
    REQUIRE(rep.alpha_integral.has_value());
    CAPTURE(c);
    CAPTURE(l);
    CHECK((*rep.alpha_integral > 0.0) == (c * l * l > 1.0));
    CHECK(std::abs(*rep.alpha_integral - alpha_closed_form(1, 1, c, l)) < 1e-8);
  }
}

TEST_CASE("alpha in three dimensions") {
  // Integral of e^{-r/l} over R^3 is 8 pi l^3.
  const KernelReport rep = certify(make_morse(1, 1, 1.9, 0.8), 3);
  REQUIRE(rep.alpha_integral.has_value());
  CHECK(*rep.alpha_integral == doctest::Approx(8.0 * std::numbers::pi * (1.9 * 0.512 - 1.0)).epsilon(1e-9));
}

TEST_CASE("kernel lookup by name") {
  CHECK(make_kernel("piecewise_log", {}).name() == "piecewise_log");
  CHECK(make_kernel("loglog", {}).name() == "piecewise_loglog");
  const RadialKernel m = make_kernel("morse", {{"C_R", 1.3}, {"l_R", 0.2}});
  CHECK(m.r_attract() == doctest::Approx(std::log(6.5) / 4.0));
  CHECK_THROWS_AS(make_kernel("nope", {}), Error);
  CHECK_THROWS_AS(make_kernel("morse", {{"l_R", -1.0}}), Error);
  CHECK_THROWS_AS(make_kernel("morse", {{"bogus", 1.0}}), Error);
  const RadialKernel j = make_kernel(nlohmann::json{{"name", "morse"}, {"params", {{"C_R", 1.9}, {"l_R", 0.8}}}});
  CHECK(j.r_attract() == doctest::Approx(std::log(2.375) / 0.25));
}

TEST_CASE("report serializes flat") {
  const nlohmann::json j = to_json(certify(make_piecewise_log()));
  CHECK(j.at("conf_class") == "BORDERLINE");
  CHECK(j.at("alpha_integral") == "NOT_INTEGRABLE");
  for (const auto& [key, value] : j.items()) CHECK_FALSE(value.is_object());
}
