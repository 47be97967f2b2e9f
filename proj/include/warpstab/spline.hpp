#pragma once

#include <vector>

namespace warpstab {

// Natural cubic spline through (x_i, y_i). C2, so the second derivative is
// continuous and piecewise linear.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);

  struct Value {
    double f, d1, d2;
  };
  Value operator()(double t) const;

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

  // Exact minimum of the interpolant over its hull (critical points of each cubic).
  double minimum() const;

 private:
  std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace warpstab
