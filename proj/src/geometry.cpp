#include "warpstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/spline.hpp"

namespace warpstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double x) { return std::isfinite(x); }

double log_sinh(double r) {
  if (r < 20.0) return std::log(std::sinh(r));
  return r - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * r));
}

double log_cosh(double r) {
  const double a = std::abs(r);
  return a - std::numbers::ln2 + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

// ---- WarpingFunction -------------------------------------------------------

WarpingFunction::WarpingFunction(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const Power& p) {
                   if (!(p.coefficient > 0.0) || !finite(p.coefficient))
                     throw PreconditionError("power warping: coefficient must be positive");
                   if (!(p.exponent >= 1.0) || !finite(p.exponent))
                     throw PreconditionError("power warping: exponent must be >= 1");
                 },
                 [](const PowerTimesLog& p) {
                   if (!(p.exponent > 0.0) || !finite(p.exponent) || !finite(p.log_power))
                     throw PreconditionError("power-log warping: exponent must be positive");
                 },
                 [](const Sinh&) {}, [](const Cosh&) {},
                 [](const Linear& l) {
                   if (!finite(l.slope) || !finite(l.intercept) || (l.slope == 0.0 && !(l.intercept > 0.0)))
                     throw PreconditionError("linear warping: must be positive somewhere");
                 },
                 [](const Constant& c) {
                   if (!(c.value > 0.0) || !finite(c.value))
                     throw PreconditionError("constant warping: value must be positive");
                 },
                 [this](const Sampled& s) {
                   for (double v : s.rho)
                     if (!(v > 0.0) || !finite(v)) throw PreconditionError("sampled warping: values must be positive");
                   spline_ = std::make_shared<CubicSpline>(s.r, s.rho);
                   if (!(spline_->minimum() > 0.0))
                     throw PreconditionError("sampled warping: cubic interpolant dips to a non-positive value");
                 },
             },
             kind_);
}

WarpingFunction WarpingFunction::reflect() const {
  WarpingFunction out = *this;
  out.reflected_ = !reflected_;
  return out;
}

std::pair<double, double> WarpingFunction::domain() const {
  std::pair<double, double> d = std::visit(
      Overloaded{
          [](const Power&) { return std::pair{0.0, kInf}; },
          [](const PowerTimesLog&) { return std::pair{0.0, kInf}; },
          [](const Sinh&) { return std::pair{0.0, kInf}; },
          [](const Cosh&) { return std::pair{-kInf, kInf}; },
          [](const Linear& l) {
            if (l.slope > 0.0) return std::pair{-l.intercept / l.slope, kInf};
            if (l.slope < 0.0) return std::pair{-kInf, -l.intercept / l.slope};
            return std::pair{-kInf, kInf};
          },
          [](const Constant&) { return std::pair{-kInf, kInf}; },
          [this](const Sampled&) { return std::pair{spline_->lo(), spline_->hi()}; },
      },
      kind_);
  if (reflected_) d = {-d.second, -d.first};
  return d;
}

bool WarpingFunction::contains(double r) const {
  const auto [lo, hi] = domain();
  if (is_sampled()) return r >= lo && r <= hi;
  return r > lo && r < hi;
}

RhoValues WarpingFunction::eval(double r) const {
  if (!reflected_) return eval_unreflected(r);
  RhoValues v = eval_unreflected(-r);
  v.d1 = -v.d1;
  return v;
}

LocalWarp WarpingFunction::local(double r) const {
  if (!reflected_) return local_unreflected(r);
  LocalWarp w = local_unreflected(-r);
  w.g1 = -w.g1;
  return w;
}

RhoValues WarpingFunction::eval_unreflected(double r) const {
  return std::visit(
      Overloaded{
          [r](const Power& p) -> RhoValues {
            if (r < 0.0) throw DomainError("power warping: r < 0");
            const double c = p.coefficient, a = p.exponent;
            const double d2 = (a == 1.0) ? 0.0 : c * a * (a - 1.0) * std::pow(r, a - 2.0);
            return {c * std::pow(r, a), c * a * std::pow(r, a - 1.0), d2};
          },
          [r](const PowerTimesLog& p) -> RhoValues {
            if (r < 0.0) throw DomainError("power-log warping: r < 0");
            const double a = p.exponent, k = p.log_power, s = r + std::numbers::e, L = std::log(s);
            const double ra = std::pow(r, a), ra1 = std::pow(r, a - 1.0);
            const double ra2 = (a == 1.0) ? 0.0 : a * (a - 1.0) * std::pow(r, a - 2.0);
            const double rho = ra * std::pow(L, k);
            const double d1 = a * ra1 * std::pow(L, k) + k * ra * std::pow(L, k - 1.0) / s;
            const double d2 = ra2 * std::pow(L, k) + 2.0 * a * k * ra1 * std::pow(L, k - 1.0) / s +
                              k * ra * ((k - 1.0) * std::pow(L, k - 2.0) - std::pow(L, k - 1.0)) / (s * s);
            return {rho, d1, d2};
          },
          [r](const Sinh&) -> RhoValues {
            if (r < 0.0) throw DomainError("sinh warping: r < 0");
            return {std::sinh(r), std::cosh(r), std::sinh(r)};
          },
          [r](const Cosh&) -> RhoValues { return {std::cosh(r), std::sinh(r), std::cosh(r)}; },
          [r](const Linear& l) -> RhoValues {
            const double v = l.slope * r + l.intercept;
            if (v < 0.0) throw DomainError("linear warping: negative at r = " + format_number(r));
            return {v, l.slope, 0.0};
          },
          [](const Constant& c) -> RhoValues { return {c.value, 0.0, 0.0}; },
          [this, r](const Sampled&) -> RhoValues {
            if (r < spline_->lo() || r > spline_->hi())
              throw DomainError("sampled warping: r = " + format_number(r) + " outside grid hull");
            const auto v = (*spline_)(r);
            return {v.f, v.d1, v.d2};
          },
      },
      kind_);
}

LocalWarp WarpingFunction::local_unreflected(double r) const {
  auto check_positive = [r](bool ok) {
    if (!ok) throw SingularPointError("rho vanishes or is undefined at r = " + format_number(r));
  };
  return std::visit(
      Overloaded{
          [&](const Power& p) -> LocalWarp {
            check_positive(r > 0.0);
            const double a = p.exponent;
            return {std::log(p.coefficient) + a * std::log(r), a / r, a * (a - 1.0) / (r * r)};
          },
          [&](const PowerTimesLog& p) -> LocalWarp {
            check_positive(r > 0.0);
            const double a = p.exponent, k = p.log_power, s = r + std::numbers::e, L = std::log(s);
            const double g1 = a / r + k / (L * s);
            const double g2 = a * (a - 1.0) / (r * r) + 2.0 * a * k / (r * L * s) + k * (k - 1.0) / (L * L * s * s) -
                              k / (L * s * s);
            return {a * std::log(r) + k * std::log(L), g1, g2};
          },
          [&](const Sinh&) -> LocalWarp {
            check_positive(r > 0.0);
            return {log_sinh(r), 1.0 / std::tanh(r), 1.0};
          },
          [&](const Cosh&) -> LocalWarp { return {log_cosh(r), std::tanh(r), 1.0}; },
          [&](const Linear& l) -> LocalWarp {
            const double v = l.slope * r + l.intercept;
            check_positive(v > 0.0);
            return {std::log(v), l.slope / v, 0.0};
          },
          [](const Constant& c) -> LocalWarp { return {std::log(c.value), 0.0, 0.0}; },
          [&](const Sampled&) -> LocalWarp {
            check_positive(r >= spline_->lo() && r <= spline_->hi());
            const auto v = (*spline_)(r);
            return {std::log(v.f), v.d1 / v.f, v.d2 / v.f};
          },
      },
      kind_);
}

std::string WarpingFunction::name() const {
  return std::visit(Overloaded{
                        [](const Power&) { return std::string("power"); },
                        [](const PowerTimesLog&) { return std::string("power_log"); },
                        [](const Sinh&) { return std::string("sinh"); },
                        [](const Cosh&) { return std::string("cosh"); },
                        [](const Linear&) { return std::string("linear"); },
                        [](const Constant&) { return std::string("constant"); },
                        [](const Sampled&) { return std::string("sampled"); },
                    },
                    kind_);
}

std::string WarpingFunction::describe() const {
  std::string s = std::visit(
      Overloaded{
          [](const Power& p) {
            return "power(c=" + format_number(p.coefficient) + ", alpha=" + format_number(p.exponent) + ")";
          },
          [](const PowerTimesLog& p) {
            return "power_log(alpha=" + format_number(p.exponent) + ", k=" + format_number(p.log_power) + ")";
          },
          [](const Sinh&) { return std::string("sinh"); },
          [](const Cosh&) { return std::string("cosh"); },
          [](const Linear& l) {
            return "linear(slope=" + format_number(l.slope) + ", intercept=" + format_number(l.intercept) + ")";
          },
          [](const Constant& c) { return "constant(" + format_number(c.value) + ")"; },
          [](const Sampled& s) { return "sampled(" + std::to_string(s.r.size()) + " points)"; },
      },
      kind_);
  return reflected_ ? "reflected " + s : s;
}

// ---- fiber -----------------------------------------------------------------

double sphere_area(int d, double radius) {
  const double k = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k) * std::pow(radius, d);
}

FiberSpec FiberSpec::round_sphere(int dim, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("sphere radius must be positive");
  FiberSpec f;
  f.dim = dim;
  f.scalar_curvature = dim * (dim - 1) / (radius * radius);
  f.area = sphere_area(dim, radius);
  f.sphere_radius = radius;
  f.validate();
  return f;
}

FiberSpec FiberSpec::custom(int dim, double scalar_curvature, double area) {
  FiberSpec f;
  f.dim = dim;
  f.scalar_curvature = scalar_curvature;
  f.area = area;
  f.validate();
  return f;
}

void FiberSpec::validate() const {
  if (dim < 2) throw PreconditionError("fiber dimension must be >= 2 (surfaces use the 2-d constants)");
  if (!(area > 0.0) || !finite(area)) throw PreconditionError("fiber area must be positive");
  if (!finite(scalar_curvature)) throw PreconditionError("fiber scalar curvature must be finite");
}

// ---- manifold --------------------------------------------------------------

std::string interval_name(const Interval& iv) {
  return std::visit(Overloaded{
                        [](const HalfLine&) { return std::string("half_line"); },
                        [](const FullLine&) { return std::string("full_line"); },
                        [](const Segment& s) {
                          return "segment[" + format_number(s.b) + ", " + format_number(s.c) + "]";
                        },
                    },
                    iv);
}

WarpedProductSpec::WarpedProductSpec(Interval iv, int n_, FiberSpec fiber_, WarpingFunction warping_)
    : interval(iv), n(n_), fiber(std::move(fiber_)), warping(std::move(warping_)) {
  fiber.validate();
  if (n < 3) throw PreconditionError("n must be >= 3");
  if (n != fiber.dim + 1) throw PreconditionError("n must equal fiber dimension + 1");
  if (const auto* s = std::get_if<Segment>(&interval))
    if (!(s->c > s->b)) throw PreconditionError("segment requires b < c");

  // Closed-form warpings must be positive on the whole interior; sampled ones are
  // truncated to their grid hull.
  const auto [dlo, dhi] = warping.domain();
  const auto [lo, hi] = std::visit(Overloaded{
                                       [](const HalfLine&) { return std::pair{0.0, kInf}; },
                                       [](const FullLine&) { return std::pair{-kInf, kInf}; },
                                       [](const Segment& s) { return std::pair{s.b, s.c}; },
                                   },
                                   interval);
  if (warping.is_sampled()) {
    if (std::max(lo, dlo) >= std::min(hi, dhi))
      throw PreconditionError("sampled warping grid does not meet the interval");
  } else if (lo < dlo || hi > dhi) {
    throw PreconditionError(warping.describe() + " is not positive on all of " + interval_name(interval));
  }
}

std::pair<double, double> WarpedProductSpec::open_range() const {
  const auto [dlo, dhi] = warping.domain();
  const auto [lo, hi] = std::visit(Overloaded{
                                       [](const HalfLine&) { return std::pair{0.0, kInf}; },
                                       [](const FullLine&) { return std::pair{-kInf, kInf}; },
                                       [](const Segment& s) { return std::pair{s.b, s.c}; },
                                   },
                                   interval);
  return {std::max(lo, dlo), std::min(hi, dhi)};
}

std::string WarpedProductSpec::describe() const {
  std::string fib = fiber.is_round_sphere()
                        ? "S^" + std::to_string(fiber.dim) + "(R=" + format_number(*fiber.sphere_radius) + ")"
                        : "F^" + std::to_string(fiber.dim) + "(S_F=" + format_number(fiber.scalar_curvature) +
                              ", A=" + format_number(fiber.area) + ")";
  return interval_name(interval) + " x_{" + warping.describe() + "} " + fib;
}

WarpedProductSpec half_line_over_sphere(int n, WarpingFunction w, double radius) {
  return WarpedProductSpec(HalfLine{}, n, FiberSpec::round_sphere(n - 1, radius), std::move(w));
}

// ---- operations ------------------------------------------------------------

RhoValues eval_rho(const WarpedProductSpec& spec, double r) {
  const auto [lo, hi] = spec.open_range();
  const bool inside = spec.warping.is_sampled() ? (r >= lo && r <= hi) : (r > lo && r < hi);
  if (!inside || !finite(r)) throw DomainError("r = " + format_number(r) + " outside " + spec.describe());
  return spec.warping.eval(r);
}

double scalar_curvature(const WarpedProductSpec& spec, const LocalWarp& w) {
  if (!finite(w.log_rho)) throw SingularPointError("rho vanishes");
  const double m = spec.n - 1.0;
  return spec.fiber.scalar_curvature * std::exp(-2.0 * w.log_rho) - m * (2.0 * w.g2 + (m - 1.0) * w.g1 * w.g1);
}

double scalar_curvature(const WarpedProductSpec& spec, double r) {
  const auto [lo, hi] = spec.open_range();
  if (!(r >= lo && r <= hi) || !finite(r)) throw DomainError("r = " + format_number(r) + " outside " + spec.describe());
  return scalar_curvature(spec, spec.warping.local(r));
}

SmoothnessReport smoothness_check(const WarpedProductSpec& spec) {
  constexpr double tol = 1e-9;
  if (spec.is_segment()) return {Smoothness::HasBoundary, "segment has two boundary components"};
  if (spec.is_full_line()) {
    for (double sgn : {-1.0, 1.0})
      for (double r = 1e-3; r <= 1e6; r *= 2.0) {
        const double x = sgn * r;
        if (!spec.warping.contains(x) || !(spec.warping.eval(x).rho > 0.0))
          return {Smoothness::SingularAtOrigin, "rho not positive at r = " + format_number(x)};
      }
    if (!spec.warping.contains(0.0) || !(spec.warping.eval(0.0).rho > 0.0))
      return {Smoothness::SingularAtOrigin, "rho not positive at r = 0"};
    return {Smoothness::SmoothBoundaryless, "rho > 0 on all sampled points"};
  }
  const auto [dlo, dhi] = spec.warping.domain();
  if (dlo > 0.0) return {Smoothness::HasBoundary, "warping grid starts at r = " + format_number(dlo)};
  const RhoValues v0 = spec.warping.eval(0.0);
  if (std::abs(v0.rho) > tol) return {Smoothness::HasBoundary, "rho(0) = " + format_number(v0.rho) + " > 0"};
  if (!spec.fiber.is_round_sphere()) return {Smoothness::SingularAtOrigin, "rho(0) = 0 but fiber is not a round sphere"};
  const double target = 1.0 / *spec.fiber.sphere_radius;
  if (std::abs(v0.d1 - target) > tol)
    return {Smoothness::SingularAtOrigin,
            "rho'(0) = " + format_number(v0.d1) + " differs from 1/R = " + format_number(target)};
  return {Smoothness::SmoothBoundaryless, "rho(0) = 0 and rho'(0) = 1/R"};
}

bool is_boundaryless(const WarpedProductSpec& spec) {
  return smoothness_check(spec).kind == Smoothness::SmoothBoundaryless;
}

double volume_ball(const WarpedProductSpec& spec, double R, const QuadratureSpec& quad) {
  if (!spec.is_half_line()) throw PreconditionError("volume_ball requires a half-line spec");
  if (!(R > 0.0)) throw PreconditionError("volume_ball requires R > 0");
  quad.validate();
  const auto [dlo, dhi] = spec.warping.domain();
  if (dlo > 0.0 || R > dhi) throw DomainError("warping not defined on [0, R]");
  const double p = spec.n - 1.0;
  auto f = [&](double r) { return std::pow(spec.warping.eval(r).rho, p); };
  // Split at 1 so the log-substitution covers the far part of large balls.
  double total = 0.0;
  if (R > 1.0) {
    total = integrate(f, 0.0, 1.0, quad).value + integrate(f, 1.0, R, quad).value;
  } else {
    total = integrate(f, 0.0, R, quad).value;
  }
  const double v = spec.fiber.area * total;
  if (!finite(v)) throw QuadratureError("volume overflows");
  return v;
}

GrowthFit growth_exponent(const WarpedProductSpec& spec, double r_min, double r_max, int points) {
  if (!(r_min >= 1.0) || !(r_max > r_min)) throw PreconditionError("growth_exponent requires r_max > r_min >= 1");
  if (points < 8) throw PreconditionError("growth_exponent: insufficient data (fewer than 8 grid points)");
  std::vector<double> x(points), y(points);
  const double step = std::log(r_max / r_min) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double r = (i == points - 1) ? r_max : r_min * std::exp(step * i);
    x[i] = std::log(r);
    y[i] = spec.warping.local(r).log_rho;
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < points; ++i) mx += x[i], my += y[i];
  mx /= points;
  my /= points;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < points; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  GrowthFit fit;
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  fit.xi_samples.reserve(points);
  for (int i = 0; i < points; ++i) fit.xi_samples.emplace_back(std::exp(x[i]), std::exp(y[i] - fit.alpha * x[i]));
  return fit;
}

double log_xi(const LocalWarp& w, double r, double alpha) { return w.log_rho - alpha * std::log(r); }

std::vector<OscillationSample> oscillation_condition(const WarpedProductSpec& spec, double R0,
                                                     const std::vector<double>& T_grid, std::optional<double> alpha,
                                                     const QuadratureSpec& quad) {
  if (!(R0 > 0.0)) throw PreconditionError("R0 must be positive");
  if (T_grid.empty()) return {};
  for (std::size_t i = 0; i < T_grid.size(); ++i)
    if (!(T_grid[i] > R0) || (i > 0 && !(T_grid[i] > T_grid[i - 1])))
      throw PreconditionError("T grid must be increasing and beyond R0");
  const double a = alpha ? *alpha : growth_exponent(spec, std::max(1.0, R0), T_grid.back()).alpha;
  auto integrand = [&](double r) {
    const double d = spec.warping.local(r).g1 - a / r;  // xi'/xi
    return r * d * d;
  };
  std::vector<OscillationSample> out;
  double acc = 0.0, prev = R0;
  for (double T : T_grid) {
    acc += integrate(integrand, prev, T, quad).value;
    prev = T;
    const double ratio = (acc <= 1e-12) ? kInf : std::log(T) / acc;
    out.push_back({T, ratio});
  }
  return out;
}

}  // namespace warpstab
