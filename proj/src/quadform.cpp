#include "warpstab/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/log.hpp"
#include "warpstab/spline.hpp"

namespace warpstab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kOriginClamp = 1e-6;

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

// Sub-panels of [lo, hi]: sampled warpings are split at their knots so each panel sees a
// smooth cubic.
std::vector<double> panel_breaks(const WarpedProductSpec& spec, double lo, double hi) {
  std::vector<double> br{lo};
  if (const auto* s = std::get_if<Sampled>(&spec.warping.kind())) {
    for (double x : s->r) {
      const double y = spec.warping.reflected() ? -x : x;
      if (y > lo && y < hi) br.push_back(y);
    }
    std::sort(br.begin() + 1, br.end());
  }
  br.push_back(hi);
  return br;
}

struct Sample {
  double v, dv, log_scale;  // f/e^L, f_r/e^L
  LocalWarp w;
};

}  // namespace

FormIntegrals form_integrals(const WarpedProductSpec& spec, const RadialTestFunction& f_in, const QuadratureSpec& quad,
                             bool with_direct) {
  quad.validate();
  f_in.validate(spec);

  RadialTestFunction f = f_in;
  if (spec.is_half_line() && f.support_lo() == 0.0) {
    const auto [dlo, dhi] = spec.warping.domain();
    const bool rho_vanishes = dlo <= 0.0 && spec.warping.eval(0.0).rho == 0.0;
    if (rho_vanishes && !is_boundaryless(spec)) {
      warn("support touches the singular origin of " + spec.describe() + "; clamped to [1e-6, " +
           format_number(f.support_hi()) + "]");
      f = f.clamped(kOriginClamp, f.support_hi());
    }
  }

  const double m = spec.n - 1.0;
  const double SF = spec.fiber.scalar_curvature;
  const double logA = std::log(spec.fiber.area);

  FormIntegrals out;
  out.has_direct = with_direct;
  double log_norm = kNegInf;

  const auto& pieces = f.pieces();
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto br = panel_breaks(spec, pieces[k].lo, pieces[k].hi);
    for (std::size_t j = 0; j + 1 < br.size(); ++j) {
      const double lo = br[j], hi = br[j + 1];
      auto sample = [&](double r) {
        Sample s;
        s.w = spec.warping.local(r);
        const ScaledValue ev = f.evaluate_piece(k, s.w, r);
        s.v = ev.value;
        s.dv = ev.slope;
        s.log_scale = 2.0 * ev.log_scale + m * s.w.log_rho;
        return s;
      };
      // Reference scale: largest log weight over a few probes (geometric on wide panels).
      double ref = kNegInf;
      const bool wide = lo > 0.0 && hi / lo > 8.0;
      for (double t : {0.02, 0.25, 0.5, 0.75, 0.98}) {
        const double r = wide ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
        const Sample s = sample(r);
        if (s.v != 0.0 || s.dv != 0.0) ref = std::max(ref, s.log_scale);
      }
      if (ref == kNegInf) continue;
      auto weight = [&](const Sample& s) {
        return (s.v == 0.0 && s.dv == 0.0) ? 0.0 : std::exp(s.log_scale - ref);
      };

      const double scale = std::exp(ref + logA);
      auto q0 = integrate(
          [&](double r) {
            const Sample s = sample(r);
            return weight(s) * s.dv * s.dv;
          },
          lo, hi, quad);
      auto g = integrate(
          [&](double r) {
            const Sample s = sample(r);
            const double g1 = s.w.g1;
            return weight(s) * (m * (m - 1.0) * g1 * g1 * s.v * s.v + 4.0 * m * g1 * s.v * s.dv +
                                SF * std::exp(-2.0 * s.w.log_rho) * s.v * s.v);
          },
          lo, hi, quad);
      auto nrm = integrate(
          [&](double r) {
            const Sample s = sample(r);
            return weight(s) * s.v * s.v;
          },
          lo, hi, quad);
      out.q0 += q0.value * scale;
      out.g += g.value * scale;
      out.g_l1 += g.l1 * scale;
      if (nrm.value > 0.0) log_norm = log_add(log_norm, std::log(nrm.value) + ref + logA);
      if (with_direct) {
        auto p = integrate(
            [&](double r) {
              const Sample s = sample(r);
              return weight(s) * scalar_curvature(spec, s.w) * s.v * s.v;
            },
            lo, hi, quad, quad.relative_tolerance * (q0.l1 + g.l1));
        out.potential += p.value * scale;
        out.potential_l1 += p.l1 * scale;
      }
    }
  }
  if (!std::isfinite(out.q0) || !std::isfinite(out.g) || !std::isfinite(out.potential))
    throw QuadratureError("quadratic form overflows for this test function");
  out.log_norm = log_norm;
  return out;
}

double quad_form_direct(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                        const QuadratureSpec& quad) {
  const FormIntegrals I = form_integrals(spec, f, quad, true);
  return I.q0 + a * I.potential;
}

double quad_form_ibp(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                     const QuadratureSpec& quad) {
  const FormIntegrals I = form_integrals(spec, f, quad, false);
  return I.q0 + a * I.g;
}

double quad_form_checked(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                         const QuadratureSpec& quad) {
  const FormIntegrals I = form_integrals(spec, f, quad, true);
  const double direct = I.q0 + a * I.potential, ibp = I.q0 + a * I.g;
  if (std::abs(direct - ibp) > 1e-7 * (1.0 + std::abs(ibp)))
    throw InternalError("direct and integrated-by-parts forms disagree: " + format_number(direct) + " vs " +
                        format_number(ibp) + " on " + spec.describe());
  return ibp;
}

double AffineForm::magnitude(double a) const { return std::abs(q0) + std::abs(a) * g_l1; }

double AffineForm::rayleigh(double a) const {
  const double q = at(a);
  if (q == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(q)) - log_norm), q);
}

std::optional<double> AffineForm::critical_a() const {
  if (g < 0.0) return -q0 / g;
  return std::nullopt;
}

AffineForm a_decomposition(const WarpedProductSpec& spec, const RadialTestFunction& f, const QuadratureSpec& quad) {
  const FormIntegrals I = form_integrals(spec, f, quad, false);
  return {I.q0, I.g, I.g_l1, I.log_norm};
}

double rayleigh_quotient(const WarpedProductSpec& spec, double a, const RadialTestFunction& f,
                         const QuadratureSpec& quad) {
  return a_decomposition(spec, f, quad).rayleigh(a);
}

}  // namespace warpstab
