#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "confine/diagnostics.hpp"
#include "confine/error.hpp"
#include "confine/theory.hpp"

using namespace confine;

namespace {

ParticleState centered_random(std::mt19937_64& gen, std::size_t n, bool clustered) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> pos(2 * n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Heavy-tailed radii so some particles sit well outside the bulk.
    const double scale = clustered ? std::exp(2.0 * g(gen)) : 1.0;
    pos[2 * i] = scale * g(gen);
    pos[2 * i + 1] = scale * g(gen);
  }
  double total = 0.0;
  for (double& x : m) total += (x = u(gen));
  for (double& x : m) x /= total;
  return recenter(ParticleState(2, pos, m));
}

std::vector<double> unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

bool sorted_contains(const std::vector<std::size_t>& v, std::size_t x) { return std::binary_search(v.begin(), v.end(), x); }

}  // namespace

TEST_CASE("partition examples") {
  // focal, close neighbour, opposite particle, coincident copy of the focal point.
  const ParticleState s = ParticleState::with_equal_masses(2, {10, 0, 10.5, 0, -10, 0, 10, 0});
  const NeighborhoodPartition p = partition(s, 0, 1.0, 5.0);
  CHECK(p.near == std::vector<std::size_t>{1});
  CHECK(p.far == std::vector<std::size_t>{2});
  CHECK(sorted_contains(p.half_space, 2));
  CHECK_FALSE(sorted_contains(p.near, 3));
  CHECK_FALSE(sorted_contains(p.far, 3));
  CHECK_FALSE(sorted_contains(p.near, 0));
  CHECK(p.support_radius == doctest::Approx(10.5));

  const ParticleState at_origin = ParticleState::with_equal_masses(2, {0, 0, 1, 0});
  CHECK_THROWS_AS(partition(at_origin, 0, 1.0, 2.0), Error);
  CHECK_THROWS_AS(partition(s, 0, 2.0, 1.0), Error);
}

TEST_CASE("partition consistency") {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 50; ++t) {
    const ParticleState s = centered_random(gen, 40, t % 2 == 0);
    const double ra = 0.3 + 0.1 * (t % 5);
    const NeighborhoodPartition p = partition(s, 0, ra, 2.0 * ra);
    const NeighborhoodPartition wider = partition(s, 0, ra, 3.0 * ra);
    for (std::size_t j : p.near) CHECK_FALSE(sorted_contains(p.far, j));
    for (std::size_t j : wider.far) CHECK(sorted_contains(p.far, j));
    CHECK(wider.far.size() <= p.far.size());
    // Every other index is near, far, coincident or in the middle band.
    for (std::size_t j = 1; j < s.size(); ++j) {
      const double d = std::hypot(s.position(j)[0] - s.position(0)[0], s.position(j)[1] - s.position(0)[1]);
      CHECK(sorted_contains(p.near, j) == (d > 0.0 && d <= ra));
      CHECK(sorted_contains(p.far, j) == (d > 2.0 * ra));
    }
  }
}

TEST_CASE("one-third mass examples") {
  const ParticleState pair(2, {1, 0, -1, 0}, {0.5, 0.5});
  const OneThirdMass r = one_third_mass_check(pair, std::vector<double>{1, 0});
  CHECK(r.lhs_mass == doctest::Approx(0.5));
  CHECK(r.holds);
  const OneThirdMass single = one_third_mass_check(ParticleState(2, {0, 0}, {1.0}), std::vector<double>{0, 1});
  CHECK(single.lhs_mass == 1.0);
  CHECK(single.holds);
  CHECK_THROWS_AS(one_third_mass_check(ParticleState(2, {1, 0, 3, 0}, {0.5, 0.5}), std::vector<double>{1, 0}),
                  Error);
}

TEST_CASE("one-third mass on points of a circle, brute force over directions") {
  for (std::size_t n : {3u, 4u, 7u, 12u, 50u}) {
    std::vector<double> pos;
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = unit(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      pos.insert(pos.end(), e.begin(), e.end());
    }
    const ParticleState s = recenter(ParticleState::with_equal_masses(2, pos));
    double worst = 1.0;
    for (int a = 0; a < 360; ++a) {
      const OneThirdMass r = one_third_mass_check(s, unit(a * std::numbers::pi / 180.0));
      CHECK(r.holds);
      worst = std::min(worst, r.lhs_mass);
    }
    CAPTURE(n);
    CHECK(worst >= 1.0 / 3.0 - 1e-12);
  }
}

TEST_CASE("one-third mass on random centered configurations") {
  std::mt19937_64 gen(32);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const ParticleState s = centered_random(gen, 2 + t % 60, t % 3 == 0);
    for (int d = 0; d < 64; ++d) {
      if (!one_third_mass_check(s, unit(2.0 * std::numbers::pi * d / 64.0)).holds) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("claim ratio examples") {
  // Focal particle far out; all other mass on the opposite side.
  const ParticleState s = recenter(ParticleState(2, {20, 0, -5, 0, -5, 1, -5, -1}, {0.1, 0.3, 0.3, 0.3}));
  const ClaimRatio r = claim_ratio_check(s, 0, 1.0, 2.0);
  CHECK(r.t_repulsive == 0.0);
  CHECK(r.t_attractive > 0.0);
  CHECK(r.ratio_ok);
  CHECK_THROWS_AS(claim_ratio_check(s, 1, 1.0, 10.0), Error);
  try {
    claim_ratio_check(s, 1, 1.0, 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionRadius);
  }
}

TEST_CASE("claim ratio holds on every admissible sample") {
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> ra_dist(0.05, 2.0);
  std::uniform_real_distribution<double> factor(2.0, 4.0);
  std::size_t admissible = 0;
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    ParticleState s = centered_random(gen, 3 + t % 40, true);
    // Put a dense clump next to the outermost particle so the near set is populated.
    std::size_t far_i = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = std::hypot(s.position(i)[0], s.position(i)[1]);
      if (r > best) best = r, far_i = i;
    }
    const double ra = ra_dist(gen);
    const double r_cut = factor(gen) * ra;
    for (std::size_t j = 0; j < s.size() && j < 6; ++j) {
      if (j == far_i) continue;
      s.position(j)[0] = s.position(far_i)[0] + 0.5 * ra * std::cos(j);
      s.position(j)[1] = s.position(far_i)[1] + 0.5 * ra * std::sin(j);
    }
    s = recenter(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(std::hypot(s.position(i)[0], s.position(i)[1]) > r_cut)) continue;
      ++admissible;
      if (!claim_ratio_check(s, i, ra, r_cut).ratio_ok) ++failures;
    }
  }
  CHECK(admissible > 1000);
  CHECK(failures == 0);
}

TEST_CASE("K1 radius") {
  SUBCASE("purely attractive quadratic starts at the first probe point") {
    const RadialKernel quad =
        make_custom("quadratic", [](double r) { return 0.5 * r * r; }, [](double r) { return r; });
    const KernelReport rep = certify(quad);
    CHECK(k1_constant(rep) == 0.0);
    const auto r = k1_radius(quad, rep);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(rep.probe.radii().front()));
  }
  SUBCASE("log kernel: constant tail below K1") {
    const RadialKernel k = make_piecewise_log();
    const KernelReport rep = certify(k);
    const double k1 = 10.0 * rep.c_w * rep.r_attract_estimate;
    CHECK(k1_constant(rep) == doctest::Approx(k1));
    CHECK(k1 >= 1.0);
    CHECK_FALSE(k1_radius(k, rep).has_value());
  }
  SUBCASE("Morse tails decay") {
    for (const RadialKernel& k : {make_morse(1, 1, 1.9, 0.8), make_morse(1, 1, 1.3, 0.2)}) {
      CHECK_FALSE(k1_radius(k, certify(k)).has_value());
    }
  }
  SUBCASE("growing kernel with a repulsive core") {
    // w' = r - 1: R_a = 1, C_W = 1, K1 = 10; w' r > 10 beyond (1 + sqrt(41)) / 2.
    const RadialKernel k =
        make_custom("core", [](double r) { return 0.5 * r * r - r; }, [](double r) { return r - 1.0; });
    const KernelReport rep = certify(k);
    CHECK(rep.r_attract_estimate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.c_w == doctest::Approx(1.0).epsilon(1e-9));
    const auto r = k1_radius(k, rep);
    REQUIRE(r.has_value());
    CHECK(*r > 2.0 * rep.r_attract_estimate);
    CHECK(*r == doctest::Approx((1.0 + std::sqrt(41.0)) / 2.0).epsilon(1e-3));
    for (double rho : rep.probe.radii()) {
      if (rho >= *r) CHECK(k.slope(rho) * rho > k1_constant(rep));
    }
    // Kernel-driven claim check on random configurations.
    std::mt19937_64 gen(34);
    int failures = 0;
    std::size_t tested = 0;
    for (int t = 0; t < 300; ++t) {
      const ParticleState s = centered_random(gen, 30, true);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(std::hypot(s.position(i)[0], s.position(i)[1]) > *r)) continue;
        ++tested;
        if (!claim_ratio_check(s, k, rep, i).ratio_ok) ++failures;
      }
    }
    CHECK(tested > 100);
    CHECK(failures == 0);
  }
}

TEST_CASE("check report") {
  std::mt19937_64 gen(35);
  const ParticleState s = centered_random(gen, 40, false);
  ParticleState shifted = s;
  for (std::size_t i = 0; i < s.size(); ++i) shifted.position(i)[0] += 3.0;

  const RadialKernel k = make_morse(1, 1, 1.9, 0.8);
  const nlohmann::json rep = theory_report(shifted, &k);
  std::vector<std::string> names;
  for (const auto& c : rep.at("checks")) {
    names.push_back(c.at("name"));
    CHECK(c.at("pass") == true);
    CHECK(c.at("inputs_digest") == state_digest(shifted));
    CHECK(c.contains("witness"));
  }
  CHECK(names == std::vector<std::string>{"recentered", "one_third_mass", "t_bounds", "dm3dt_identity", "momentum",
                                          "claim_ratio"});
  CHECK(state_digest(s) != state_digest(shifted));
  CHECK(state_digest(s) == state_digest(s));
  CHECK(state_digest(s).size() == 16);

  const nlohmann::json bare = theory_report(s, nullptr);
  CHECK(bare.at("checks").size() == 4);
}
