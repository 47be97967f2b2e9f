#pragma once

#include <optional>

#include "warpstab/geometry.hpp"
#include "warpstab/quadrature.hpp"
#include "warpstab/test_function.hpp"

namespace warpstab {

// Raw integrals behind both routes, each already multiplied by A(F).
struct FormIntegrals {
  double q0 = 0.0;            // A int f_r^2 rho^{n-1}
  double g = 0.0;             // a-linear part after integration by parts
  double g_l1 = 0.0;          // A int |G integrand|, the cancellation scale of g
  double potential = 0.0;     // A int S f^2 rho^{n-1} (direct route)
  double potential_l1 = 0.0;
  double log_norm = 0.0;      // log(A int f^2 rho^{n-1})
  bool has_direct = false;
};

FormIntegrals form_integrals(const WarpedProductSpec& spec, const RadialTestFunction& f,
                             const QuadratureSpec& quad = {}, bool with_direct = true);

// A(F) int [f_r^2 + a S f^2] rho^{n-1} dr
double quad_form_direct(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                        const QuadratureSpec& quad = {});

// Integrated-by-parts form: gradient + a(n-1)(n-2) int rho'^2 rho^{n-3} f^2
//   + 4a(n-1) int rho' rho^{n-2} f f_r + a S_F int rho^{n-3} f^2, all times A(F).
double quad_form_ibp(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                     const QuadratureSpec& quad = {});

// Both routes; throws InternalError if they disagree by more than 1e-7 (1 + |Q|).
double quad_form_checked(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                         const QuadratureSpec& quad = {});

double rayleigh_quotient(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                         const QuadratureSpec& quad = {});

struct AffineForm {
  double q0 = 0.0;
  double g = 0.0;
  double g_l1 = 0.0;
  double log_norm = 0.0;

  double at(double a) const { return q0 + a * g; }
  // Scale against which a negative value is judged: |Q0| + |a| int |G integrand|.
  double magnitude(double a) const;
  double rayleigh(double a) const;
  // a* = -Q0/G when G < 0: every a > a* makes the form negative on this f.
  std::optional<double> critical_a() const;
};

AffineForm a_decomposition(const WarpedProductSpec& spec, const RadialTestFunction& f, const QuadratureSpec& quad = {});

}  // namespace warpstab
