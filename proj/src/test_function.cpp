#include "warpstab/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"

namespace warpstab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool needs_rho(const Piece& p) {
  return std::any_of(p.terms.begin(), p.terms.end(),
                     [](const Term& t) { return t.rho_power != 0.0 || t.xi_power != 0.0; });
}

// Horner for p(s) and p'(s).
std::pair<double, double> poly_eval(const std::vector<double>& c, double s) {
  double v = 0.0, d = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    d = d * s + v;
    v = v * s + c[i];
  }
  return {v, d};
}

}  // namespace

double ScaledValue::f() const { return value == 0.0 ? 0.0 : value * std::exp(log_scale); }
double ScaledValue::df() const { return slope == 0.0 ? 0.0 : slope * std::exp(log_scale); }
double ScaledValue::log_abs() const { return value == 0.0 ? kNegInf : std::log(std::abs(value)) + log_scale; }

RadialTestFunction::RadialTestFunction(std::vector<Piece> pieces, std::optional<double> growth_exponent)
    : pieces_(std::move(pieces)), growth_(growth_exponent) {
  if (pieces_.empty()) throw PreconditionError("test function needs at least one piece");
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const Piece& p = pieces_[k];
    if (!(p.hi > p.lo) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
      throw PreconditionError("test function piece has empty or non-finite range");
    if (k > 0 && std::abs(p.lo - pieces_[k - 1].hi) > 1e-12 * std::max(1.0, std::abs(p.lo)))
      throw PreconditionError("test function pieces are not contiguous");
    if (p.terms.empty()) throw PreconditionError("test function piece has no terms");
    for (const Term& t : p.terms) {
      if (t.xi_power != 0.0 && !growth_) throw PreconditionError("xi-powered term without a growth exponent");
      if (!(t.poly_scale > 0.0) || t.poly.empty()) throw PreconditionError("malformed polynomial factor");
    }
  }
  if (pieces_.front().lo < 0.0) throw PreconditionError("test function support must lie in r >= 0");
}

RadialTestFunction RadialTestFunction::hat(double b, double peak, double c, double height) {
  if (!(b < peak && peak < c)) throw PreconditionError("hat requires b < peak < c");
  const double s = height >= 0.0 ? 1.0 : -1.0, h = std::abs(height);
  if (h == 0.0) throw PreconditionError("hat height must be nonzero");
  // Up leg: h (r - b)/(peak - b); down leg: h (c - r)/(c - peak). Polynomials in r directly.
  Term up{std::log(h / (peak - b)), s, {-b, 1.0}, 1.0, 0, 0, 0};
  Term down{std::log(h / (c - peak)), s, {c, -1.0}, 1.0, 0, 0, 0};
  return RadialTestFunction({Piece{b, peak, {up}}, Piece{peak, c, {down}}});
}

RadialTestFunction RadialTestFunction::scaled(double c) const {
  if (c == 0.0) throw PreconditionError("scaling by 0 gives the excluded zero function");
  RadialTestFunction out = *this;
  for (Piece& p : out.pieces_)
    for (Term& t : p.terms) {
      t.log_magnitude += std::log(std::abs(c));
      if (c < 0.0) t.sign = -t.sign;
    }
  return out;
}

RadialTestFunction RadialTestFunction::clamped(double lo, double hi) const {
  std::vector<Piece> kept;
  for (Piece p : pieces_) {
    p.lo = std::max(p.lo, lo);
    p.hi = std::min(p.hi, hi);
    if (p.hi > p.lo) kept.push_back(std::move(p));
  }
  return RadialTestFunction(std::move(kept), growth_);
}

ScaledValue RadialTestFunction::evaluate_piece(std::size_t k, const LocalWarp& w, double r) const {
  const Piece& p = pieces_[k];
  const double alpha = growth_.value_or(0.0);
  const double log_r = r > 0.0 ? std::log(r) : kNegInf;

  // Up to a handful of terms; keep a small fixed buffer.
  double L[8], v[8], d[8];
  std::size_t m = p.terms.size();
  std::vector<double> Lh, vh, dh;
  double *pl = L, *pv = v, *pd = d;
  if (m > 8) {
    Lh.resize(m), vh.resize(m), dh.resize(m);
    pl = Lh.data(), pv = vh.data(), pd = dh.data();
  }
  double Lmax = kNegInf;
  for (std::size_t j = 0; j < m; ++j) {
    const Term& t = p.terms[j];
    double logm = t.log_magnitude, dlog = 0.0;
    if (t.r_power != 0.0) logm += t.r_power * log_r, dlog += t.r_power / r;
    if (t.rho_power != 0.0) logm += t.rho_power * w.log_rho, dlog += t.rho_power * w.g1;
    if (t.xi_power != 0.0) {
      logm += t.xi_power * (w.log_rho - alpha * log_r);
      dlog += t.xi_power * (w.g1 - alpha / r);
    }
    const auto [pv0, pd0] = poly_eval(t.poly, r / t.poly_scale);
    pl[j] = logm;
    pv[j] = t.sign * pv0;
    pd[j] = t.sign * (pd0 / t.poly_scale + pv0 * dlog);
    if (pv[j] == 0.0 && pd[j] == 0.0) pl[j] = kNegInf;
    if (pl[j] > Lmax) Lmax = pl[j];
  }
  ScaledValue out;
  if (Lmax == kNegInf) return out;
  out.log_scale = Lmax;
  for (std::size_t j = 0; j < m; ++j) {
    if (pl[j] == kNegInf) continue;
    const double e = std::exp(pl[j] - Lmax);
    out.value += pv[j] * e;
    out.slope += pd[j] * e;
  }
  return out;
}

ScaledValue RadialTestFunction::evaluate(const WarpingFunction& w, double r) const {
  if (r < support_lo() || r > support_hi()) return {};
  std::size_t k = 0;
  while (k + 1 < pieces_.size() && r > pieces_[k].hi) ++k;
  const LocalWarp lw = needs_rho(pieces_[k]) ? w.local(r) : LocalWarp{0.0, 0.0, 0.0};
  return evaluate_piece(k, lw, r);
}

void RadialTestFunction::validate(const WarpedProductSpec& spec) const {
  const auto [lo, hi] = spec.open_range();
  const double b = support_lo(), c = support_hi();
  const bool touches_origin = spec.is_half_line() && b == 0.0;
  if (b < lo || c > hi)
    throw PreconditionError("support [" + format_number(b) + ", " + format_number(c) + "] not inside " +
                            spec.describe());

  auto at = [&](std::size_t k, double r) {
    const LocalWarp lw = needs_rho(pieces_[k]) ? spec.warping.local(r) : LocalWarp{0.0, 0.0, 0.0};
    return evaluate_piece(k, lw, r);
  };
  // Endpoint values at an origin where rho = 0 are taken as one-sided limits.
  auto at_safe = [&](std::size_t k, double r, double toward) {
    try {
      return at(k, r);
    } catch (const SingularPointError&) {
      return at(k, r + 1e-12 * (toward - r));
    }
  };

  double peak = kNegInf;  // log max |f| over probes
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const Piece& p = pieces_[k];
    for (double s : {0.25, 0.5, 0.75}) peak = std::max(peak, at(k, p.lo + s * (p.hi - p.lo)).log_abs());
  }
  if (peak == kNegInf) throw PreconditionError("test function is identically zero");

  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k) {
    const double x = pieces_[k].hi;
    const ScaledValue L = at(k, x), R = at(k + 1, x);
    const double ref = std::max(L.log_abs(), R.log_abs());
    if (ref == kNegInf) continue;
    const double diff = L.value * std::exp(L.log_scale - ref) - R.value * std::exp(R.log_scale - ref);
    if (std::abs(diff) > 1e-9) throw PreconditionError("test function discontinuous at r = " + format_number(x));
  }

  const double tiny = std::log(1e-9);
  const bool need_left = !(touches_origin && is_boundaryless(spec));
  if (need_left && at_safe(0, b, c).log_abs() - peak > tiny)
    throw PreconditionError("test function must vanish at r = " + format_number(b));
  if (at_safe(pieces_.size() - 1, c, b).log_abs() - peak > tiny)
    throw PreconditionError("test function must vanish at r = " + format_number(c));
}

}  // namespace warpstab
