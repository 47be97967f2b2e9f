#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "warpstab/config.hpp"
#include "warpstab/errors.hpp"
#include "warpstab/geometry.hpp"

using namespace warpstab;

TEST_CASE("flat space has zero scalar curvature") {
  for (int n : {3, 4, 7}) {
    auto flat = half_line_over_sphere(n, WarpingFunction::identity());
    for (double r = 0.1; r <= 100.0; r *= 1.3) CHECK(std::abs(scalar_curvature(flat, r)) <= 1e-9);
  }
}

TEST_CASE("hyperbolic space has S = -n(n-1)") {
  for (int n : {3, 5}) {
    auto hyp = half_line_over_sphere(n, WarpingFunction(Sinh{}));
    for (double r : {0.05, 1.0, 10.0, 300.0, 5000.0}) CHECK(scalar_curvature(hyp, r) == doctest::Approx(-n * (n - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("cylinder over the unit 3-sphere has S = 6") {
  WarpedProductSpec cyl(FullLine{}, 4, FiberSpec::round_sphere(3), WarpingFunction(Constant{1.0}));
  for (double r : {-50.0, 0.0, 3.0}) CHECK(scalar_curvature(cyl, r) == doctest::Approx(6.0));
}

TEST_CASE("flat cones c r over rescaled fibers are flat") {
  for (double c : {0.5, 2.0, 3.0}) {
    const int n = 5;
    WarpedProductSpec cone(HalfLine{}, n, FiberSpec::custom(n - 1, (n - 1.0) * (n - 2.0) * c * c, 1.0),
                           WarpingFunction::power(c, 1.0));
    for (double r = 0.1; r < 100; r *= 2) CHECK(std::abs(scalar_curvature(cone, r)) <= 1e-9);
  }
}

TEST_CASE("closed-form derivatives agree with finite differences") {
  std::vector<WarpingFunction> ws{WarpingFunction::power(1.5, 2.3), WarpingFunction(PowerTimesLog{2.0, 1.5}),
                                  WarpingFunction(Sinh{}), WarpingFunction(Cosh{}), WarpingFunction(Linear{2.0, 1.0})};
  for (const auto& w : ws) {
    for (double r : {0.7, 2.0, 9.0}) {
      const auto v = w.eval(r);
      auto [d1, d2] = oracle::derivatives([&](double x) { return w.eval(x).rho; }, r, 1e-4 * r);
      CHECK(v.d1 == doctest::Approx(d1).epsilon(1e-6));
      CHECK(v.d2 == doctest::Approx(d2).epsilon(1e-5).scale(1.0));
      const auto l = w.local(r);
      CHECK(l.log_rho == doctest::Approx(std::log(v.rho)));
    }
  }
}

TEST_CASE("log-form local data stays finite where rho overflows") {
  WarpingFunction s(Sinh{});
  const auto l = s.local(1000.0);
  CHECK(l.log_rho == doctest::Approx(1000.0 - std::log(2.0)));
  CHECK(l.g1 == doctest::Approx(1.0));
  CHECK(l.g2 == doctest::Approx(1.0));
  WarpingFunction c(Cosh{});
  CHECK(c.local(-800.0).log_rho == doctest::Approx(800.0 - std::log(2.0)));
}

TEST_CASE("property: curvature matches the raw formula on random warpings") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(U(rng) * 5);
    WarpingFunction w = trial % 3 == 0   ? WarpingFunction::power(0.5 + U(rng), 1.0 + 3.0 * U(rng))
                        : trial % 3 == 1 ? WarpingFunction(PowerTimesLog{1.0 + 2.0 * U(rng), -1.0 + 3.0 * U(rng)})
                                         : WarpingFunction(Linear{0.2 + U(rng), 2.0 * U(rng)});
    const double R = 0.5 + U(rng);
    WarpedProductSpec spec(HalfLine{}, n, FiberSpec::round_sphere(n - 1, R), w);
    const double r = 0.1 + 20.0 * U(rng);
    const auto v = w.eval(r);
    const double SF = (n - 1.0) * (n - 2.0) / (R * R);
    CHECK(scalar_curvature(spec, r) == doctest::Approx(oracle::scalar_curvature(n, SF, v.rho, v.d1, v.d2)).epsilon(1e-10));
  }
}

TEST_CASE("smoothness classification") {
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction::identity())).kind == Smoothness::SmoothBoundaryless);
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction(Sinh{}))).kind == Smoothness::SmoothBoundaryless);
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction::power(1.0, 2.0))).kind == Smoothness::SingularAtOrigin);
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction::power(2.0, 1.0))).kind == Smoothness::SingularAtOrigin);
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction::power(0.5, 1.0), 2.0)).kind == Smoothness::SmoothBoundaryless);
  CHECK(smoothness_check(half_line_over_sphere(3, WarpingFunction(Cosh{}))).kind == Smoothness::HasBoundary);
  CHECK(smoothness_check(WarpedProductSpec(Segment{1, 2}, 3, FiberSpec::round_sphere(2), WarpingFunction::identity())).kind ==
        Smoothness::HasBoundary);
  CHECK(smoothness_check(WarpedProductSpec(FullLine{}, 3, FiberSpec::round_sphere(2), WarpingFunction(Cosh{}))).kind ==
        Smoothness::SmoothBoundaryless);
  const auto rep = smoothness_check(half_line_over_sphere(3, WarpingFunction::power(1.0, 2.0)));
  CHECK_FALSE(rep.reason.empty());
}

TEST_CASE("ball volumes: Euclidean and hyperbolic") {
  auto flat = half_line_over_sphere(3, WarpingFunction::identity());
  CHECK(volume_ball(flat, 2.0) == doctest::Approx(4.0 / 3.0 * M_PI * 8.0).epsilon(1e-10));
  auto hyp = half_line_over_sphere(3, WarpingFunction(Sinh{}));
  CHECK(volume_ball(hyp, 3.0) == doctest::Approx(M_PI * (std::sinh(6.0) - 6.0)).epsilon(1e-10));
  auto flat5 = half_line_over_sphere(5, WarpingFunction::identity());
  CHECK(volume_ball(flat5, 1.5) == doctest::Approx(oracle::sphere_area(4) * std::pow(1.5, 5) / 5.0).epsilon(1e-10));
  CHECK_THROWS_AS(volume_ball(WarpedProductSpec(FullLine{}, 3, FiberSpec::round_sphere(2), WarpingFunction(Cosh{})), 1.0),
                  PreconditionError);
}

TEST_CASE("fiber presets") {
  const auto s = FiberSpec::round_sphere(2, 2.0);
  CHECK(s.scalar_curvature == doctest::Approx(0.5));
  CHECK(s.area == doctest::Approx(16.0 * M_PI));
  CHECK(sphere_area(3) == doctest::Approx(2.0 * M_PI * M_PI));
  CHECK(FiberSpec::custom(3, -2.0, 5.0).total_scalar_curvature() == doctest::Approx(-10.0));
}

TEST_CASE("growth exponent fit and xi decomposition") {
  auto p = half_line_over_sphere(3, WarpingFunction::power(3.0, 2.5));
  const auto fit = growth_exponent(p, 1.0, 1e6);
  CHECK(fit.alpha == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  auto pl = half_line_over_sphere(3, WarpingFunction(PowerTimesLog{2.0, 1.0}));
  const auto fl = growth_exponent(pl, 1.0, 1e6);
  CHECK(fl.alpha > 2.0);
  CHECK(fl.alpha < 2.2);
  CHECK_THROWS_AS(growth_exponent(p, 1.0, 1e6, 4), PreconditionError);
  const auto w = p.warping.local(10.0);
  CHECK(log_xi(w, 10.0, 2.5) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("oscillation condition is infinite for pure powers") {
  auto p = half_line_over_sphere(3, WarpingFunction::power(1.0, 2.0));
  auto s = oscillation_condition(p, 10.0, {1e2, 1e4}, 2.0);
  REQUIRE(s.size() == 2);
  CHECK(std::isinf(s[1].ratio));
}

TEST_CASE("sampled warping via spline") {
  Sampled tab;
  for (int i = 0; i <= 400; ++i) {
    const double r = 1.0 + 9.0 * i / 400.0;
    tab.r.push_back(r);
    tab.rho.push_back(r * r);
  }
  WarpedProductSpec spec(Segment{1.0, 10.0}, 3, FiberSpec::round_sphere(2), WarpingFunction(tab));
  const auto v = spec.warping.eval(5.01);
  CHECK(v.rho == doctest::Approx(5.01 * 5.01).epsilon(1e-8));
  CHECK(v.d1 == doctest::Approx(10.02).epsilon(1e-5));
  CHECK(v.d2 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS_AS(spec.warping.eval(11.0), DomainError);
}

TEST_CASE("reflection") {
  WarpingFunction c(Cosh{});
  CHECK(c.reflect().eval(2.0).rho == doctest::Approx(std::cosh(2.0)));
  WarpingFunction l(Linear{2.0, 1.0});
  const auto lr = l.reflect();
  CHECK(lr.eval(-3.0).rho == doctest::Approx(7.0));
  CHECK(lr.eval(-3.0).d1 == doctest::Approx(-2.0));
  CHECK(lr.reflect().eval(3.0).rho == doctest::Approx(7.0));
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(half_line_over_sphere(2, WarpingFunction::identity()), PreconditionError);
  CHECK_THROWS_AS(WarpingFunction::power(1.0, 0.5), PreconditionError);
  CHECK_THROWS_AS(WarpedProductSpec(HalfLine{}, 3, FiberSpec::round_sphere(2), WarpingFunction(Linear{1.0, -1.0})),
                  PreconditionError);
  CHECK_THROWS_AS(WarpedProductSpec(FullLine{}, 3, FiberSpec::round_sphere(2), WarpingFunction(Sinh{})), PreconditionError);
  CHECK_THROWS_AS(WarpedProductSpec(HalfLine{}, 4, FiberSpec::round_sphere(2), WarpingFunction(Sinh{})), PreconditionError);
  CHECK_THROWS_AS(WarpedProductSpec(Segment{2.0, 1.0}, 3, FiberSpec::round_sphere(2), WarpingFunction(Sinh{})),
                  PreconditionError);
  CHECK_THROWS_AS(half_line_over_sphere(3, WarpingFunction::identity()).warping.local(0.0), SingularPointError);
}

TEST_CASE("config round trip of specs") {
  auto spec = WarpedProductSpec(Segment{0.5, 3.0}, 4, FiberSpec::round_sphere(3, 1.5), WarpingFunction(PowerTimesLog{2.0, -0.5}));
  auto back = spec_from_config(spec_to_config(spec));
  CHECK(back.n == 4);
  CHECK(back.warping.eval(1.7).rho == doctest::Approx(spec.warping.eval(1.7).rho));
  CHECK(back.fiber.scalar_curvature == doctest::Approx(spec.fiber.scalar_curvature));
  CHECK(back.describe() == spec.describe());
  auto cfg = KeyValueConfig::parse("n = 3\nwarping.kind = power\nwarping.exponent = 9/4  # comment\n");
  CHECK(spec_from_config(cfg).warping.eval(2.0).rho == doctest::Approx(std::pow(2.0, 2.25)));
  CHECK_THROWS_AS(spec_from_config(KeyValueConfig::parse("n = 3\nwarping.kind = banana\n")), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
}
