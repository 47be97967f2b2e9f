#include "warpstab/cones.hpp"

#include <cmath>
#include <limits>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"

namespace warpstab {

namespace {

// int_lo^hi r^q dr without cancellation when q is close to -1.
double power_integral(double q, double lo, double hi) {
  const double k = q + 1.0;
  const double L = std::log(hi / lo);
  if (std::abs(k * L) < 1e-300) return L;
  return std::exp(k * std::log(lo)) * std::expm1(k * L) / k;
}

struct Coeffs {
  double c1, c2, e1, e2, e3, p;
};

Coeffs coeffs(int n, double a) {
  Coeffs c;
  c.c1 = -(8 * a * a * a + 3 * a * a - 2 * a - 1) / (4 * a * a);
  c.c2 = (2 * a * a - a - 1) / a;
  c.e1 = n - 4.0 - 1.0 / a;
  c.e2 = n - 3.0 - 1.0 / a;
  c.e3 = n - 2.0 - 1.0 / a;
  c.p = cone_exponent(n, a);
  return c;
}

}  // namespace

void ConeSpec::validate() const {
  if (n < 3) throw PreconditionError("cone needs n >= 3");
  if (fiber_norm_integral && !(*fiber_norm_integral > 0.0))
    throw PreconditionError("fiber norm integral must be positive for a non-flat cone");
}

double cone_exponent(int n, double a) {
  if (!(a > 0.0)) throw PreconditionError("cone exponent needs a > 0");
  return (-n * a + 3.0 * a + 1.0) / (2.0 * a);
}

void ConeTestFunction::validate() const {
  if (!(R > 1.0) || !std::isfinite(R)) throw PreconditionError("cone test function needs R > 1");
}

double ConeTestFunction::value(int n, double a, double r) const {
  const double p = cone_exponent(n, a);
  if (r <= 0.5 || r >= 2.0 * R) return 0.0;
  if (r <= 1.0) return amplitude * (2.0 * r - 1.0);
  if (r <= R) return amplitude * std::pow(r, p);
  return amplitude * std::pow(R, p) * (2.0 - r / R);
}

double ConeTestFunction::derivative(int n, double a, double r) const {
  const double p = cone_exponent(n, a);
  if (r < 0.5 || r >= 2.0 * R) return 0.0;
  if (r < 1.0) return 2.0 * amplitude;
  if (r < R) return amplitude * p * std::pow(r, p - 1.0);
  return -amplitude * std::pow(R, p - 1.0);
}

double cone_quadform(const ConeSpec& cone, double a, const ConeTestFunction& phi) {
  cone.validate();
  phi.validate();
  // The reduction assumes a > 1; a = 1 is kept since the integrand stays well defined there.
  if (!(a >= 1.0)) throw PreconditionError("cone form needs a >= 1, got " + format_number(a));
  const Coeffs c = coeffs(cone.n, a);
  auto I = [](double q, double lo, double hi) { return power_integral(q, lo, hi); };

  // [1/2, 1]: phi = 2r - 1, phi' = 2.
  const double inner = c.c1 * (4 * I(c.e1 + 2, 0.5, 1) - 4 * I(c.e1 + 1, 0.5, 1) + I(c.e1, 0.5, 1)) +
                       c.c2 * (4 * I(c.e2 + 1, 0.5, 1) - 2 * I(c.e2, 0.5, 1)) + 4 * I(c.e3, 0.5, 1);
  // [1, R]: every term is a multiple of 1/r.
  const double middle = (c.c1 + c.c2 * c.p + c.p * c.p) * std::log(phi.R);
  // [R, 2R] after r = R s; the powers of R cancel.
  const double outer = c.c1 * (4 * I(c.e1, 1, 2) - 4 * I(c.e1 + 1, 1, 2) + I(c.e1 + 2, 1, 2)) -
                       c.c2 * (2 * I(c.e2, 1, 2) - I(c.e2 + 1, 1, 2)) + I(c.e3, 1, 2);
  return cone.fiber_factor() * phi.amplitude * phi.amplitude * (inner + middle + outer);
}

double slope_coefficient(int n, double a) { return -n * a + a + n * n / 4.0 - n + 1.0; }

Rational slope_coefficient_exact(int n, Rational a) {
  return -Rational(n) * a + a + Rational(n * n, 4) - Rational(n) + Rational(1);
}

SimonsReference simons_reference(int m) {
  SimonsReference s;
  s.m = m;
  s.value = catalog::simons(m);
  s.exact = catalog::exact::simons(m);
  s.ambient_dim = 2 * m;
  s.one_stable = s.exact >= Rational(1);
  if (s.one_stable != (2 * m >= 8)) throw InternalError("Simons stability flag disagrees with 2m >= 8");
  return s;
}

std::vector<ConeSweepRow> cone_sweep(const ConeSpec& cone, double a, const std::vector<double>& R_grid) {
  std::vector<ConeSweepRow> out;
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    const double Q = cone_quadform(cone, a, ConeTestFunction{R_grid[i], 1.0});
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (i > 0) slope = (Q - out.back().Q) / std::log(R_grid[i] / R_grid[i - 1]);
    out.push_back({R_grid[i], Q, slope});
  }
  return out;
}

}  // namespace warpstab
