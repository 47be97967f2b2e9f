#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "warpstab/quadrature.hpp"

namespace warpstab {

class CubicSpline;

// ---- warping function kinds ----------------------------------------------

struct Power {  // c r^alpha
  double coefficient = 1.0;
  double exponent = 1.0;
};
struct PowerTimesLog {  // r^alpha log(r + e)^k
  double exponent = 1.0;
  double log_power = 1.0;
};
struct Sinh {};
struct Cosh {};
struct Linear {  // slope * r + intercept
  double slope = 1.0;
  double intercept = 0.0;
};
struct Constant {
  double value = 1.0;
};
struct Sampled {
  std::vector<double> r;
  std::vector<double> rho;
};

struct RhoValues {
  double rho, d1, d2;
};

// Log-form local data. Stays finite where rho itself overflows (sinh at r = 1e3)
// or underflows, which is what the quadrature and assembly code consume.
struct LocalWarp {
  double log_rho;
  double g1;  // rho'/rho
  double g2;  // rho''/rho
};

class WarpingFunction {
 public:
  using Kind = std::variant<Power, PowerTimesLog, Sinh, Cosh, Linear, Constant, Sampled>;

  explicit WarpingFunction(Kind kind);

  static WarpingFunction power(double c, double alpha) { return WarpingFunction(Power{c, alpha}); }
  static WarpingFunction identity() { return power(1.0, 1.0); }

  const Kind& kind() const { return kind_; }
  bool is_sampled() const { return std::holds_alternative<Sampled>(kind_); }
  bool reflected() const { return reflected_; }
  // r -> rho(-r); used to treat the negative end of a FullLine as a HalfLine end.
  WarpingFunction reflect() const;

  // Open interval where rho > 0 (before reflection is applied to the argument).
  std::pair<double, double> domain() const;
  bool contains(double r) const;

  // Values on the closure of the domain (rho may be 0 at an endpoint).
  RhoValues eval(double r) const;
  // Requires rho(r) > 0.
  LocalWarp local(double r) const;

  std::string name() const;
  std::string describe() const;

 private:
  RhoValues eval_unreflected(double r) const;
  LocalWarp local_unreflected(double r) const;

  Kind kind_;
  bool reflected_ = false;
  std::shared_ptr<const CubicSpline> spline_;
};

// ---- fiber and manifold ---------------------------------------------------

struct FiberSpec {
  int dim = 2;
  double scalar_curvature = 2.0;
  double area = 0.0;
  std::optional<double> sphere_radius;  // set by the round-sphere preset

  static FiberSpec round_sphere(int dim, double radius = 1.0);
  static FiberSpec custom(int dim, double scalar_curvature, double area);

  double total_scalar_curvature() const { return scalar_curvature * area; }
  bool is_round_sphere() const { return sphere_radius.has_value(); }
  void validate() const;
};

// Area of the round d-sphere of the given radius.
double sphere_area(int d, double radius = 1.0);

struct HalfLine {};
struct FullLine {};
struct Segment {
  double b, c;
};
using Interval = std::variant<HalfLine, FullLine, Segment>;

std::string interval_name(const Interval& iv);

struct WarpedProductSpec {
  Interval interval;
  int n;
  FiberSpec fiber;
  WarpingFunction warping;

  WarpedProductSpec(Interval iv, int n, FiberSpec fiber, WarpingFunction warping);

  bool is_half_line() const { return std::holds_alternative<HalfLine>(interval); }
  bool is_full_line() const { return std::holds_alternative<FullLine>(interval); }
  bool is_segment() const { return std::holds_alternative<Segment>(interval); }

  // Open interval of admissible r: the interval's interior intersected with rho > 0.
  std::pair<double, double> open_range() const;

  std::string describe() const;
};

// Unit round sphere fiber S^{n-1}, HalfLine.
WarpedProductSpec half_line_over_sphere(int n, WarpingFunction w, double radius = 1.0);

// ---- operations -----------------------------------------------------------

RhoValues eval_rho(const WarpedProductSpec& spec, double r);

// S_M = S_F/rho^2 - (n-1)(2 rho''/rho + (n-2) rho'^2/rho^2)
double scalar_curvature(const WarpedProductSpec& spec, double r);
double scalar_curvature(const WarpedProductSpec& spec, const LocalWarp& w);

enum class Smoothness { SmoothBoundaryless, HasBoundary, SingularAtOrigin };

struct SmoothnessReport {
  Smoothness kind;
  std::string reason;
};

SmoothnessReport smoothness_check(const WarpedProductSpec& spec);
bool is_boundaryless(const WarpedProductSpec& spec);

double volume_ball(const WarpedProductSpec& spec, double R, const QuadratureSpec& quad = {});

struct GrowthFit {
  double alpha;
  double intercept;                                  // fitted log xi level
  std::vector<std::pair<double, double>> xi_samples;  // (r, xi(r))
};

GrowthFit growth_exponent(const WarpedProductSpec& spec, double r_min, double r_max, int points = 64);

// log xi(r) = log rho(r) - alpha log r, and xi'/xi = rho'/rho - alpha/r.
double log_xi(const LocalWarp& w, double r, double alpha);

// Oscillation test for power profiles with bounded xi: (T, log T / int_{R0}^T r (xi'/xi)^2 dr).
// The trend toward 0 is what the caller inspects; a vanishing denominator gives +inf.
struct OscillationSample {
  double T;
  double ratio;
};
std::vector<OscillationSample> oscillation_condition(const WarpedProductSpec& spec, double R0,
                                                     const std::vector<double>& T_grid,
                                                     std::optional<double> alpha = std::nullopt,
                                                     const QuadratureSpec& quad = {});

}  // namespace warpstab
