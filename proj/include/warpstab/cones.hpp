#pragma once

#include <optional>
#include <vector>

#include "warpstab/thresholds.hpp"

namespace warpstab {

// Minimal cone C^n in R^{n+1}, written as [0, inf) x_r F. The fiber factor
// int_F |A_F|^{(a+1)/a} multiplies the reduced form and is kept abstract.
struct ConeSpec {
  int n = 8;
  std::optional<double> fiber_norm_integral;

  void validate() const;
  double fiber_factor() const { return fiber_norm_integral.value_or(1.0); }
};

// p = (-n a + 3 a + 1)/(2 a), the exponent that makes the [1, R] integrand exactly c / r.
double cone_exponent(int n, double a);

// Piecewise test function: 0 on [0, 1/2], 2r - 1 on [1/2, 1], r^p on [1, R],
// R^p (2 - r/R) on [R, 2R], 0 beyond; everything times `amplitude`.
struct ConeTestFunction {
  double R = 1e4;
  double amplitude = 1.0;

  void validate() const;
  double value(int n, double a, double r) const;
  double derivative(int n, double a, double r) const;  // right derivative at the breakpoints
};

// The reduced cone form
//   int -c1 r^{n-4-1/a} phi^2 + c2 r^{n-3-1/a} phi phi' + r^{n-2-1/a} phi'^2,
//   c1 = (8a^3+3a^2-2a-1)/(4a^2), c2 = (2a^2-a-1)/a,
// in closed form piece by piece, times the fiber factor. Needs a >= 1.
double cone_quadform(const ConeSpec& cone, double a, const ConeTestFunction& phi);

// Coefficient of log R: -n a + a + n^2/4 - n + 1.
double slope_coefficient(int n, double a);
Rational slope_coefficient_exact(int n, Rational a);

struct SimonsReference {
  int m;
  double value;
  Rational exact;
  int ambient_dim;  // 2m
  bool one_stable;  // value >= 1, equivalently 2m >= 8
};
SimonsReference simons_reference(int m);

struct ConeSweepRow {
  double R, Q;
  double slope;  // (Q_i - Q_{i-1}) / log(R_i / R_{i-1}); NaN on the first row
};
std::vector<ConeSweepRow> cone_sweep(const ConeSpec& cone, double a, const std::vector<double>& R_grid);

}  // namespace warpstab
