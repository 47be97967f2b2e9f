#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "warpstab/geometry.hpp"
#include "warpstab/quadform.hpp"
#include "warpstab/test_function.hpp"

namespace warpstab {

enum class FamilyKind { Kawai, PolyA, PolyB, Cone };

std::string family_name(FamilyKind k);
FamilyKind family_from_name(const std::string& name);

// Variant A carries xi^{-2a(n-1)}, variant B xi^{-(n-1)/2}.
enum class PolyVariant { A, B };

// How the inner ramp of f_{R,beta} treats xi: frozen at xi(R) as in the printed family, or
// xi(r) pointwise like the outer ramp.
enum class XiRampMode { AsPrinted, Pointwise };

struct KawaiParams {
  double q, r;
};
struct PolyParams {
  double r, beta;
  PolyVariant variant = PolyVariant::A;
  XiRampMode xi_mode = XiRampMode::AsPrinted;
};
struct ConeParams {
  double r;
};
using FamilyParams = std::variant<KawaiParams, PolyParams, ConeParams>;

FamilyKind family_of(const FamilyParams& p);
std::string describe(const FamilyParams& p);

// ---- builders ---------------------------------------------------------------

// Solves rho(T) = 2 rho(R) for T > R by bisection in log rho (1e-12 relative).
double solve_doubling_radius(const WarpedProductSpec& spec, double R);

// 0 | ramp * rho^{-(n-1)/2} on [Q/2, Q] | rho^{-(n-1)/2} r^{1/2} on [Q, R] | C (g(r) - g(T)) on [R, T] | 0.
RadialTestFunction build_f_QR(const WarpedProductSpec& spec, double Q, double R);

// Power-profile family: ramps on [R/2, R] and [R^beta, 1.5 R^beta], core r^{-(n alpha - alpha - 1)/2} xi^e.
// `alpha` defaults to the growth fit over [1, 1e6] (clipped to the manifold's interval).
RadialTestFunction build_f_Rbeta(const WarpedProductSpec& spec, double a, double R, double beta, PolyVariant variant,
                                 std::optional<double> alpha = std::nullopt,
                                 XiRampMode mode = XiRampMode::AsPrinted);

// The cone test function written on a warped product (requires a > 0):
// 2r on [1/2, 1], r^p on [1, R], R^p (2 - r/R) on [R, 2R], p = (-na + 3a + 1)/(2a).
RadialTestFunction build_phi_R(const WarpedProductSpec& spec, double a, double R);

double default_growth_exponent(const WarpedProductSpec& spec);

RadialTestFunction build_family(const WarpedProductSpec& spec, double a, const FamilyParams& params,
                                std::optional<double> alpha = std::nullopt);

// ---- certificates and search -------------------------------------------------

struct InstabilityCertificate {
  WarpedProductSpec spec;
  double a;
  FamilyParams params;
  std::optional<double> growth_exponent;  // alpha used for xi in poly families
  double q_value;
  double q0, g;
  double magnitude;  // |Q0| + |a| int|G integrand|; the certificate requires Q < -1e-8 magnitude
  double rayleigh;
  std::optional<double> critical_a;

  RadialTestFunction rebuild() const;
  // Fresh evaluation of the integrated-by-parts form on the rebuilt function.
  double reevaluate(const QuadratureSpec& quad = {}) const;

  nlohmann::json to_json() const;
  static InstabilityCertificate from_json(const nlohmann::json& j);
};

struct NotFound {
  double best_rayleigh = std::numeric_limits<double>::infinity();
  double best_q = std::numeric_limits<double>::infinity();
  std::optional<FamilyParams> best_params;
  std::size_t candidates = 0;
  std::size_t skipped = 0;  // inapplicable or failed evaluations
  std::vector<std::string> notes;
};

using SearchOutcome = std::variant<InstabilityCertificate, NotFound>;

struct SearchBudget {
  std::vector<double> kawai_q{1.0, 10.0, 100.0};
  std::vector<double> kawai_r{1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
  std::vector<double> poly_r{10.0, 100.0, 1000.0};
  std::vector<double> betas{1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0, 192.0, 256.0};
  std::vector<double> cone_r{1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12};
  XiRampMode xi_mode = XiRampMode::AsPrinted;
  double negativity = 1e-8;  // relative to the form's magnitude
  unsigned threads = 1;
};

std::vector<FamilyKind> default_families();

// Candidate tuples in deterministic grid order (family order, then grid order).
std::vector<FamilyParams> candidate_grid(const WarpedProductSpec& spec, double a, const std::vector<FamilyKind>& families,
                                         const SearchBudget& budget);

SearchOutcome search_instability(const WarpedProductSpec& spec, double a,
                                 const std::vector<FamilyKind>& families = default_families(),
                                 const SearchBudget& budget = {}, const QuadratureSpec& quad = {});

}  // namespace warpstab
