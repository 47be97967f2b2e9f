#include "warpstab/spline.hpp"

#include <algorithm>
#include <cmath>

#include "warpstab/errors.hpp"

namespace warpstab {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw PreconditionError("spline: grid and values differ in length");
  if (n < 4) throw PreconditionError("spline: at least 4 points required");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw PreconditionError("spline: grid must be strictly increasing");

  // Natural end conditions; Thomas solve of the standard tridiagonal system.
  m_.assign(n, 0.0);
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    const double lower = h0 / 6.0, diag = (h0 + h1) / 3.0, upper = h1 / 6.0;
    const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    const double denom = diag - lower * c[i - 1];
    c[i] = upper / denom;
    d[i] = (rhs - lower * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
}

CubicSpline::Value CubicSpline::operator()(double t) const {
  if (t < x_.front() || t > x_.back()) throw DomainError("spline: argument outside grid hull");
  std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
  i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  Value v;
  v.f = A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  v.d1 = (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
  v.d2 = A * m_[i] + B * m_[i + 1];
  return v;
}

double CubicSpline::minimum() const {
  double best = *std::min_element(y_.begin(), y_.end());
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double h = x_[i + 1] - x_[i];
    // f' is quadratic on the panel; recover it from three samples in s = (t - x_i)/h.
    auto fp = [&](double s) { return (*this)(x_[i] + s * h).d1; };
    const double p0 = fp(0.0), ph = fp(0.5), p1 = fp(1.0);
    const double qa = 2.0 * (p0 - 2.0 * ph + p1), qb = -3.0 * p0 + 4.0 * ph - p1, qc = p0;
    double roots[2];
    int nr = 0;
    if (std::abs(qa) < 1e-300) {
      if (std::abs(qb) > 1e-300) roots[nr++] = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        roots[nr++] = (-qb - sq) / (2.0 * qa);
        roots[nr++] = (-qb + sq) / (2.0 * qa);
      }
    }
    for (int k = 0; k < nr; ++k)
      if (roots[k] > 0.0 && roots[k] < 1.0) best = std::min(best, (*this)(x_[i] + roots[k] * h).f);
  }
  return best;
}

}  // namespace warpstab
