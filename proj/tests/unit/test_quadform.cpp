#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "warpstab/errors.hpp"
#include "warpstab/quadform.hpp"
#include "warpstab/quadrature.hpp"

using namespace warpstab;

namespace {

// Legs of the piecewise-linear hat on [b, c] with peak p; each leg is integrated on its
// own interval so the kink never sits inside a Simpson panel.
struct Leg {
  double r0, slope;
  double f(double r) const { return slope * (r - r0); }
};
Leg up(double b, double p) { return {b, 1.0 / (p - b)}; }
Leg down(double p, double c) { return {c, -1.0 / (c - p)}; }

// A int [f'^2 + a S f^2] rho^{n-1} for a closed-form rho, split at the kink.
double oracle_q(int n, double SF, double A, const std::function<double(double)>& rho, const std::function<double(double)>& d1,
                const std::function<double(double)>& d2, double a, double b, double p, double c) {
  auto integrand = [&](const Leg& leg) {
    return [&, leg](double r) {
      const double w = std::pow(rho(r), n - 1), f = leg.f(r), df = leg.slope;
      return (df * df + a * oracle::scalar_curvature(n, SF, rho(r), d1(r), d2(r)) * f * f) * w;
    };
  };
  return A * (oracle::simpson(integrand(up(b, p)), b, p) + oracle::simpson(integrand(down(p, c)), p, c));
}

}  // namespace

TEST_CASE("flat hat: closed-form value") {
  auto flat = half_line_over_sphere(3, WarpingFunction::identity());
  auto f = RadialTestFunction::hat(1.0, 1.5, 2.0);
  const double expected = 4.0 * M_PI * 4.0 * 7.0 / 3.0;  // A int 4 r^2 over [1, 2]
  for (double a : {0.0, 0.3, 1.0}) {
    CHECK(quad_form_direct(flat, a, f) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(quad_form_ibp(flat, a, f) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hyperbolic and power warpings against Simpson oracle") {
  auto f = RadialTestFunction::hat(0.5, 1.2, 3.0);
  const double A = 4.0 * M_PI;
  auto hyp = half_line_over_sphere(3, WarpingFunction(Sinh{}));
  for (double a : {0.0, 0.5, 1.0}) {
    const double o = oracle_q(3, 2.0, A, [](double r) { return std::sinh(r); }, [](double r) { return std::cosh(r); },
                              [](double r) { return std::sinh(r); }, a, 0.5, 1.2, 3.0);
    CHECK(quad_form_ibp(hyp, a, f) == doctest::Approx(o).epsilon(1e-8));
  }
  auto p = half_line_over_sphere(4, WarpingFunction::power(1.0, 2.0));
  const double A3 = 2.0 * M_PI * M_PI;
  for (double a : {0.1, 0.2}) {
    const double o = oracle_q(4, 6.0, A3, [](double r) { return r * r; }, [](double r) { return 2 * r; },
                              [](double) { return 2.0; }, a, 0.5, 1.2, 3.0);
    CHECK(quad_form_direct(p, a, f) == doctest::Approx(o).epsilon(1e-8));
  }
}

TEST_CASE("property: direct and integrated-by-parts forms agree across kinds") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<WarpingFunction> kinds{WarpingFunction::identity(), WarpingFunction::power(2.0, 2.5),
                                     WarpingFunction(PowerTimesLog{1.5, 2.0}), WarpingFunction(Sinh{}),
                                     WarpingFunction(Cosh{}), WarpingFunction(Linear{0.5, 2.0}), WarpingFunction(Constant{3.0})};
  int count = 0;
  for (const auto& w : kinds) {
    for (int n : {3, 5}) {
      auto spec = half_line_over_sphere(n, w);
      for (int trial = 0; trial < 4; ++trial) {
        const double b = 0.2 + 5.0 * U(rng), width = 0.3 + 10.0 * U(rng);
        const double c = b + width, p = b + width * (0.2 + 0.6 * U(rng));
        const double a = -0.5 + 2.0 * U(rng);
        auto f = RadialTestFunction::hat(b, p, c, 0.5 + U(rng));
        const double qd = quad_form_direct(spec, a, f), qi = quad_form_ibp(spec, a, f);
        CHECK(std::abs(qd - qi) <= 1e-7 * (1.0 + std::abs(qi)));
        ++count;
      }
    }
  }
  CHECK(count >= 50);
}

TEST_CASE("homogeneity and affine dependence on a") {
  auto spec = half_line_over_sphere(3, WarpingFunction::power(1.0, 2.0));
  auto f = RadialTestFunction::hat(1.0, 2.0, 5.0);
  const double q = quad_form_ibp(spec, 0.2, f);
  CHECK(quad_form_ibp(spec, 0.2, f.scaled(3.0)) == doctest::Approx(9.0 * q).epsilon(1e-10));
  const auto af = a_decomposition(spec, f);
  for (double a : {-1.0, 0.0, 0.15, 2.0}) CHECK(af.at(a) == doctest::Approx(quad_form_ibp(spec, a, f)).epsilon(1e-10));
  if (auto ac = af.critical_a()) CHECK(af.at(*ac) == doctest::Approx(0.0).scale(af.magnitude(*ac)));
  CHECK(af.magnitude(0.2) >= std::abs(af.at(0.2)));
}

TEST_CASE("Rayleigh quotient against oracle") {
  auto flat = half_line_over_sphere(3, WarpingFunction::identity());
  auto f = RadialTestFunction::hat(1.0, 1.5, 2.0);
  const Leg u = up(1.0, 1.5), d = down(1.5, 2.0);
  const double num = oracle::simpson([&](double r) { return u.slope * u.slope * r * r; }, 1.0, 1.5) +
                     oracle::simpson([&](double r) { return d.slope * d.slope * r * r; }, 1.5, 2.0);
  const double den = oracle::simpson([&](double r) { return std::pow(u.f(r), 2) * r * r; }, 1.0, 1.5) +
                     oracle::simpson([&](double r) { return std::pow(d.f(r), 2) * r * r; }, 1.5, 2.0);
  CHECK(rayleigh_quotient(flat, 0.0, f) == doctest::Approx(num / den).epsilon(1e-9));
  // Any admissible f bounds lambda1 of [1, 2] from above: pi^2.
  CHECK(rayleigh_quotient(flat, 0.0, f) > M_PI * M_PI);
}

TEST_CASE("adaptive quadrature on known integrals") {
  QuadratureSpec q;
  auto s = integrate([](double x) { return std::sin(x); }, 0.0, M_PI, q);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-12));
  auto l = integrate([](double x) { return 1.0 / x; }, 1.0, 1e8, q);
  CHECK(l.value == doctest::Approx(std::log(1e8)).epsilon(1e-11));
  auto c = integrate([](double x) { return std::cos(x); }, 0.0, 2.0 * M_PI, q);
  CHECK(std::abs(c.value) < 1e-12);
  // l1 is the rule's own estimate of int |f|, only used as a scale.
  CHECK(c.l1 == doctest::Approx(4.0).epsilon(0.02));
  QuadratureSpec bad;
  bad.relative_tolerance = 0.0;
  CHECK_THROWS(bad.validate());
  CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, 0.0, 1.0, q), QuadratureError);
}

TEST_CASE("test functions: support, continuity and validation") {
  auto spec = half_line_over_sphere(3, WarpingFunction::identity());
  auto f = RadialTestFunction::hat(1.0, 2.0, 4.0, 3.0);
  CHECK(f.support_lo() == 1.0);
  CHECK(f.support_hi() == 4.0);
  CHECK(f.evaluate(spec.warping, 2.0).f() == doctest::Approx(3.0));
  CHECK(f.evaluate(spec.warping, 3.0).f() == doctest::Approx(1.5));
  CHECK(f.evaluate(spec.warping, 3.0).df() == doctest::Approx(-1.5));
  CHECK(f.evaluate(spec.warping, 5.0).f() == 0.0);
  CHECK_NOTHROW(f.validate(spec));
  auto seg = WarpedProductSpec(Segment{1.5, 3.0}, 3, FiberSpec::round_sphere(2), WarpingFunction::identity());
  CHECK_THROWS(f.validate(seg));
  CHECK_THROWS(RadialTestFunction::hat(2.0, 1.0, 3.0));
}
