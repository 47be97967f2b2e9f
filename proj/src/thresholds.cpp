#include "warpstab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/parallel.hpp"

namespace warpstab {

namespace catalog {

namespace {
void need_n(int n) {
  if (n < 3) throw PreconditionError("threshold catalog needs n >= 3 (got " + std::to_string(n) + ")");
}
}  // namespace

double yamabe(int n) {
  need_n(n);
  return (n - 2.0) / (4.0 * (n - 1.0));
}

double kawai_end(int n) {
  need_n(n);
  return (n - 1.0) / (4.0 * n);
}

double h(int n, double zeta) {
  need_n(n);
  if (!(zeta > 1.0) || !std::isfinite(zeta)) throw DomainError("h(n, zeta) needs zeta > 1, got " + format_number(zeta));
  const double num = n * zeta - zeta - 1.0;
  return num * num / (4.0 * zeta * (n - 1.0) * (n * zeta - 2.0));
}

double bounded_slope(int n, double C) {
  need_n(n);
  if (!(C >= 0.0)) throw PreconditionError("slope bound must be >= 0");
  if (C == 0.0) return std::numeric_limits<double>::infinity();
  return (C * C + 1.0) * (n - 2.0) / (4.0 * C * C * (n - 1.0));
}

double linear_lower(int n, double C1) {
  need_n(n);
  if (!(C1 > 1.0)) throw PreconditionError("steep linear envelope needs C1 > 1");
  return (n - 2.0) / (4.0 * (n - 1.0) * (1.0 - 1.0 / (C1 * C1)));
}

double linear_upper(int n, double C2) {
  need_n(n);
  if (!(C2 > 0.0 && C2 < 1.0)) throw PreconditionError("shallow linear envelope needs 0 < C2 < 1");
  return (n - 2.0) / (4.0 * (n - 1.0) * (1.0 - 1.0 / (C2 * C2)));
}

double cone_flat(int n) {
  need_n(n);
  return (n - 2.0) * (n - 2.0) / (4.0 * (n - 1.0));
}

double simons(int m) {
  if (m < 2) throw PreconditionError("Simons cone needs m >= 2");
  return (2.0 * m - 3.0) * (2.0 * m - 3.0) / (8.0 * (m - 1.0));
}

double catenoid(int n) {
  need_n(n);
  return (n - 2.0) / n;
}

double dim2_volume_growth(double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("volume growth exponent must be positive");
  return (alpha - 1.0) / (8.0 * alpha);
}

namespace exact {

Rational yamabe(int n) {
  need_n(n);
  return Rational(n - 2, 4 * (n - 1));
}
Rational kawai_end(int n) {
  need_n(n);
  return Rational(n - 1, 4 * n);
}
Rational h(int n, Rational zeta) {
  need_n(n);
  if (zeta <= Rational(1)) throw DomainError("h(n, zeta) needs zeta > 1");
  const Rational num = Rational(n) * zeta - zeta - Rational(1);
  return num * num / (Rational(4) * zeta * Rational(n - 1) * (Rational(n) * zeta - Rational(2)));
}
Rational bounded_slope(int n, Rational C) {
  need_n(n);
  if (C <= Rational(0)) throw PreconditionError("exact slope bound needs C > 0");
  return (C * C + Rational(1)) * Rational(n - 2) / (Rational(4) * C * C * Rational(n - 1));
}
Rational cone_flat(int n) {
  need_n(n);
  return Rational((n - 2) * (n - 2), 4 * (n - 1));
}
Rational simons(int m) {
  if (m < 2) throw PreconditionError("Simons cone needs m >= 2");
  return Rational((2 * m - 3) * (2 * m - 3), 8 * (m - 1));
}
Rational catenoid(int n) {
  need_n(n);
  return Rational(n - 2, n);
}

}  // namespace exact
}  // namespace catalog

std::vector<HCurvePoint> h_curve(int n, const std::vector<double>& zeta_grid) {
  std::vector<HCurvePoint> out;
  out.reserve(zeta_grid.size());
  for (double z : zeta_grid) out.push_back({z, catalog::h(n, z)});
  std::vector<HCurvePoint> sorted = out;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.zeta < y.zeta; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].zeta > sorted[i - 1].zeta && !(sorted[i].h >= sorted[i - 1].h))
      throw InternalError("h(" + std::to_string(n) + ", .) not monotone near zeta = " + format_number(sorted[i].zeta));
  return out;
}

// ---- hypothesis checks ------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::string kSampledTail = "sampled g2 on a geometric grid over [1e2, 1e6]";

// The warping as seen from the right end r -> +inf, in unreflected form.
std::optional<WarpingFunction> right_end(const WarpingFunction& w) {
  if (!w.reflected()) return w;
  const auto& k = w.kind();
  if (std::holds_alternative<Cosh>(k) || std::holds_alternative<Constant>(k)) return WarpingFunction(k);
  if (const auto* l = std::get_if<Linear>(&k)) return WarpingFunction(Linear{-l->slope, l->intercept});
  return std::nullopt;
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

bool convex_on(const WarpingFunction& w, double lo, double hi) {
  for (double r : geometric_grid(lo, hi, 32))
    if (!(w.local(r).g2 > 0.0)) return false;
  return true;
}

// rho' -> +inf, decided from the closed form of the kind.
bool slope_unbounded(const WarpingFunction& w) {
  const auto& k = w.kind();
  if (const auto* p = std::get_if<Power>(&k)) return p->exponent > 1.0 && p->coefficient > 0.0;
  if (const auto* p = std::get_if<PowerTimesLog>(&k)) return p->exponent > 1.0 || (p->exponent == 1.0 && p->log_power > 0.0);
  return std::holds_alternative<Sinh>(k) || std::holds_alternative<Cosh>(k);
}

// sup |rho'| over the interval, +inf when unbounded.
double slope_sup(const WarpedProductSpec& spec) {
  const auto& w = spec.warping;
  const auto& k = w.kind();
  const auto [lo, hi] = spec.open_range();
  if (spec.is_segment()) {
    double s = 0.0;
    for (int i = 0; i <= 4096; ++i) s = std::max(s, std::abs(w.eval(lo + (hi - lo) * i / 4096.0).d1));
    return s;
  }
  if (const auto* p = std::get_if<Power>(&k)) return p->exponent == 1.0 ? std::abs(p->coefficient) : kInf;
  if (const auto* l = std::get_if<Linear>(&k)) return std::abs(l->slope);
  if (std::holds_alternative<Constant>(k)) return 0.0;
  if (const auto* p = std::get_if<PowerTimesLog>(&k)) {
    if (p->exponent > 1.0 || p->log_power > 0.0) return kInf;
    if (p->log_power == 0.0) return 1.0;
    // r log(r+e)^k with k < 0: rho' peaks at moderate r and decays like log(r)^k.
    double s = 0.0;
    for (double r : geometric_grid(1e-6, 1e6, 64)) s = std::max(s, std::abs(w.eval(r).d1));
    return std::max(s, std::abs(w.eval(0.0).d1));
  }
  return kInf;
}

struct Envelope {
  double C1, C2;  // inf and sup of rho / r^alpha over r >= 1
};

// The power envelope C1 r^alpha <= rho <= C2 r^alpha on r >= 1 from the closed form.
std::optional<Envelope> power_envelope(const WarpingFunction& w, double alpha) {
  const auto& k = w.kind();
  if (const auto* p = std::get_if<Power>(&k); p && p->exponent == alpha) return Envelope{p->coefficient, p->coefficient};
  if (const auto* p = std::get_if<PowerTimesLog>(&k); p && p->exponent == alpha && p->log_power == 0.0)
    return Envelope{1.0, 1.0};
  if (const auto* l = std::get_if<Linear>(&k); l && alpha == 1.0) {
    const double at1 = l->slope + l->intercept;
    const Envelope e{std::min(l->slope, at1), std::max(l->slope, at1)};
    if (e.C1 > 0.0) return e;
  }
  return std::nullopt;
}

std::optional<double> power_exponent(const WarpingFunction& w) {
  const auto& k = w.kind();
  if (const auto* p = std::get_if<Power>(&k)) return p->exponent;
  if (const auto* p = std::get_if<PowerTimesLog>(&k)) return p->exponent;
  if (std::holds_alternative<Linear>(k)) return 1.0;
  return std::nullopt;
}

struct Ctx {
  const WarpedProductSpec& spec;
  double a;
  std::vector<HypothesisCheck>& report;
  std::vector<TheoremHit>& hits;

  HypothesisCheck check(std::string cond, bool ok, std::string method) {
    HypothesisCheck c{std::move(cond), ok, std::move(method)};
    report.push_back(c);
    return c;
  }
};

void yamabe_band(Ctx& c) {
  const int n = c.spec.n;
  const double y = catalog::yamabe(n);
  std::vector<HypothesisCheck> ch;
  ch.push_back(c.check("fiber scalar curvature S_F >= 0", c.spec.fiber.scalar_curvature >= 0.0, "fiber data"));
  ch.push_back(c.check("0 <= a <= (n-2)/(4(n-1)) = " + format_number(y), c.a >= 0.0 && c.a <= y, "exact comparison"));
  if (ch[0].satisfied && ch[1].satisfied) c.hits.push_back({"yamabe-band", "0 <= a <= " + format_number(y), true, y, ch});
}

void bounded_slope(Ctx& c) {
  if (!c.spec.fiber.is_round_sphere()) {
    c.check("fiber is a round sphere (bounded-slope)", false, "fiber data");
    return;
  }
  std::vector<HypothesisCheck> ch;
  ch.push_back(c.check("fiber is a round sphere (bounded-slope)", true, "fiber data"));
  // A sphere of radius R is the unit sphere with rho scaled by R.
  const double C = *c.spec.fiber.sphere_radius * slope_sup(c.spec);
  const bool bounded = std::isfinite(C);
  ch.push_back(c.check("|rho'| <= C with C = " + format_number(C), bounded,
                       c.spec.is_segment() ? "sampled on 4097 points" : "closed form"));
  if (!bounded) return;
  const double t = catalog::bounded_slope(c.spec.n, C);
  ch.push_back(c.check("0 <= a <= (C^2+1)(n-2)/(4 C^2 (n-1)) = " + format_number(t), c.a >= 0.0 && c.a <= t,
                       "exact comparison"));
  if (ch.back().satisfied) c.hits.push_back({"bounded-slope", "0 <= a <= " + format_number(t), true, t, ch});
}

void convex_end(Ctx& c) {
  const double t = catalog::kawai_end(c.spec.n);
  std::vector<WarpingFunction> ends;
  if (c.spec.is_half_line()) ends.push_back(c.spec.warping);
  if (c.spec.is_full_line()) {
    ends.push_back(c.spec.warping);
    ends.push_back(c.spec.warping.reflect());
  }
  for (std::size_t e = 0; e < ends.size(); ++e) {
    const std::string side = e == 0 ? "+inf" : "-inf";
    auto w = right_end(ends[e]);
    if (!w) {
      c.check("end at " + side + " has a closed-form description", false, "unverifiable");
      continue;
    }
    std::vector<HypothesisCheck> ch;
    const auto [lo, hi] = w->domain();
    const bool has_tail = hi >= 1e6;
    ch.push_back(c.check("rho'' > 0 eventually (end at " + side + ")", has_tail && convex_on(*w, 1e2, 1e6), kSampledTail));
    if (!ch.back().satisfied) continue;
    const bool unbounded = slope_unbounded(*w);
    ch.push_back(c.check("rho' -> infinity (end at " + side + ")", unbounded, "closed form"));
    std::string id = "convex-end";
    if (!unbounded) {
      // Without rho' -> inf the nonpositive-total-curvature form needs rho'' > 0 throughout
      // on a boundaryless half line.
      const bool whole =
          c.spec.is_half_line() && is_boundaryless(c.spec) && convex_on(*w, std::max(lo, 1e-6), 1e6);
      ch.push_back(c.check("S(F) <= 0, rho'' > 0 on the whole half line, no boundary",
                           c.spec.fiber.total_scalar_curvature() <= 0.0 && whole, "fiber data, sampled g2 over [1e-6, 1e6]"));
      if (!ch.back().satisfied) continue;
      id = "convex-end-nonpositive-fiber";
    }
    ch.push_back(c.check("a > (n-1)/(4n) = " + format_number(t), c.a > t, "exact comparison"));
    if (ch.back().satisfied) {
      c.hits.push_back({id, "a > " + format_number(t), false, t, ch});
      return;
    }
  }
}

void power_envelope_thm(Ctx& c) {
  if (c.spec.is_segment()) return;
  auto w = right_end(c.spec.warping);
  auto alpha = w ? power_exponent(*w) : std::nullopt;
  if (!alpha || !(*alpha > 1.0)) {
    c.check("C1 r^alpha <= rho <= C2 r^alpha with alpha > 1", false, w ? "closed form" : "unverifiable");
    return;
  }
  auto env = power_envelope(*w, *alpha);
  std::vector<HypothesisCheck> ch;
  ch.push_back(c.check("C1 r^alpha <= rho <= C2 r^alpha for r > 1, alpha = " + format_number(*alpha), env.has_value(),
                       "closed form"));
  if (!env) return;
  const double t = catalog::h(c.spec.n, *alpha);
  ch.push_back(c.check("a > h(n, alpha) = " + format_number(t), c.a > t, "exact comparison"));
  if (ch.back().satisfied) c.hits.push_back({"power-envelope", "a > " + format_number(t), false, t, ch});
}

void oscillating_profile(Ctx& c) {
  if (c.spec.is_segment()) return;
  auto w = right_end(c.spec.warping);
  auto alpha = w ? power_exponent(*w) : std::nullopt;
  if (!alpha) {
    c.check("rho = r^alpha xi with bounded xi", false, w ? "closed form" : "unverifiable");
    return;
  }
  auto env = power_envelope(*w, *alpha);
  std::vector<HypothesisCheck> ch;
  ch.push_back(c.check("rho = r^alpha xi with C1 <= xi <= C2", env.has_value(), "closed form"));
  if (!env) return;
  WarpedProductSpec end_spec(HalfLine{}, c.spec.n, c.spec.fiber, *w);
  bool decays = false;
  try {
    const std::vector<double> T{1e2, 1e3, 1e4, 1e5, 1e6};
    auto s = oscillation_condition(end_spec, 10.0, T, *alpha);
    decays = std::isfinite(s.back().ratio) && s.back().ratio < 0.05;
    for (std::size_t i = 1; i < s.size(); ++i) decays = decays && s[i].ratio < s[i - 1].ratio;
  } catch (const std::exception&) {
    decays = false;
  }
  ch.push_back(c.check("log T / int r (xi'/xi)^2 -> 0", decays, "quadrature trend over T in [1e2, 1e6]"));
  if (!decays) return;
  const double t = catalog::yamabe(c.spec.n);
  ch.push_back(c.check("a > (n-2)/(4(n-1)) = " + format_number(t), c.a > t, "exact comparison"));
  if (ch.back().satisfied) c.hits.push_back({"oscillating-profile", "a > " + format_number(t), false, t, ch});
}

void linear_envelopes(Ctx& c) {
  if (c.spec.is_segment()) return;
  if (!c.spec.fiber.is_round_sphere()) {
    c.check("fiber is a round sphere (linear envelope)", false, "fiber data");
    return;
  }
  auto w = right_end(c.spec.warping);
  auto env = w ? power_envelope(*w, 1.0) : std::nullopt;
  if (!env) {
    c.check("C1 r <= rho <= C2 r for r >= 1", false, w ? "closed form" : "unverifiable");
    return;
  }
  const double R = *c.spec.fiber.sphere_radius;
  const double C1 = env->C1 * R, C2 = env->C2 * R;
  std::vector<HypothesisCheck> base;
  base.push_back(c.check("C1 r <= rho <= C2 r for r >= 1 with C1 = " + format_number(C1) + ", C2 = " + format_number(C2),
                         true, "closed form"));
  if (C1 > 1.0) {
    auto ch = base;
    const double t = catalog::linear_lower(c.spec.n, C1);
    ch.push_back(c.check("C1 > 1 and a > (n-2)/(4(n-1)(1-C1^-2)) = " + format_number(t), c.a > t, "exact comparison"));
    if (ch.back().satisfied) c.hits.push_back({"steep-linear-envelope", "a > " + format_number(t), false, t, ch});
  }
  if (C2 < 1.0) {
    auto ch = base;
    const double t = catalog::linear_upper(c.spec.n, C2);
    ch.push_back(c.check("C2 < 1 and a < (n-2)/(4(n-1)(1-C2^-2)) = " + format_number(t), c.a < t, "exact comparison"));
    if (ch.back().satisfied) c.hits.push_back({"shallow-linear-envelope", "a < " + format_number(t), false, t, ch});
  }
}

}  // namespace

std::vector<TheoremHit> applicable_theorems(const WarpedProductSpec& spec, double a, std::vector<HypothesisCheck>* report) {
  std::vector<HypothesisCheck> local;
  std::vector<HypothesisCheck>& rep = report ? *report : local;
  std::vector<TheoremHit> hits;
  if (spec.warping.is_sampled()) {
    rep.push_back({"closed-form warping (all theorems)", false, "unverifiable: sampled warping"});
    return hits;
  }
  Ctx c{spec, a, rep, hits};
  yamabe_band(c);
  bounded_slope(c);
  convex_end(c);
  power_envelope_thm(c);
  oscillating_profile(c);
  linear_envelopes(c);
  const bool any_stable = std::any_of(hits.begin(), hits.end(), [](const auto& t) { return t.stable; });
  const bool any_unstable = std::any_of(hits.begin(), hits.end(), [](const auto& t) { return !t.stable; });
  if (any_stable && any_unstable)
    throw InternalError("stability and instability theorems both apply to " + spec.describe() + " at a = " + format_number(a));
  return hits;
}

std::string status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::StableByTheorem: return "stable_by_theorem";
    case VerdictStatus::UnstableByTheorem: return "unstable_by_theorem";
    case VerdictStatus::UnstableByCertificate: return "unstable_by_certificate";
    case VerdictStatus::UnstableBySpectrum: return "unstable_by_spectrum";
    case VerdictStatus::Undetermined: return "undetermined";
  }
  return "?";
}

std::string StabilityVerdict::provenance() const {
  switch (status) {
    case VerdictStatus::StableByTheorem:
    case VerdictStatus::UnstableByTheorem: return "theorem:" + theorem->id;
    case VerdictStatus::UnstableByCertificate:
      return "certificate:" + describe(certificate->params) + " Q=" + format_number(certificate->q_value);
    case VerdictStatus::UnstableBySpectrum:
      return "spectrum:[" + format_number(spectrum->domain.b) + "," + format_number(spectrum->domain.c) +
             "] lambda1=" + format_number(spectrum->lambda1);
    case VerdictStatus::Undetermined: {
      std::string s = "none";
      if (best_lambda1) s = "min_lambda1=" + format_number(*best_lambda1);
      if (best_rayleigh) s += " best_rayleigh=" + format_number(*best_rayleigh);
      return s;
    }
  }
  return "none";
}

StabilityVerdict classify(const WarpedProductSpec& spec, double a, const ClassifyOptions& opts) {
  StabilityVerdict v;
  if (!std::isfinite(a)) throw PreconditionError("a must be finite");
  auto hits = applicable_theorems(spec, a, &v.report);
  if (spec.warping.is_sampled()) v.notes.push_back("sampled warping: theorem hypotheses unverifiable, numeric routes only");
  if (!hits.empty()) {
    v.theorem = hits.front();
    v.status = hits.front().stable ? VerdictStatus::StableByTheorem : VerdictStatus::UnstableByTheorem;
    return v;
  }
  if (!opts.numeric) return v;

  try {
    SearchBudget budget = opts.budget;
    budget.threads = opts.threads;
    auto found = search_instability(spec, a, default_families(), budget, opts.quad);
    if (auto* cert = std::get_if<InstabilityCertificate>(&found)) {
      v.status = VerdictStatus::UnstableByCertificate;
      v.certificate = *cert;
      return v;
    }
    const auto& nf = std::get<NotFound>(found);
    if (std::isfinite(nf.best_rayleigh)) v.best_rayleigh = nf.best_rayleigh;
    v.notes.insert(v.notes.end(), nf.notes.begin(), nf.notes.end());
  } catch (const std::runtime_error& e) {
    v.notes.push_back(std::string("certificate search failed: ") + e.what());
  }

  try {
    auto scan = stability_scan(spec, a, default_schedule(spec), opts.threads);
    if (auto* u = std::get_if<UnstableOn>(&scan)) {
      v.status = VerdictStatus::UnstableBySpectrum;
      v.spectrum = *u;
      v.best_lambda1 = u->lambda1;
      return v;
    }
    v.best_lambda1 = std::get<NoNegativeFound>(scan).smallest_lambda1;
  } catch (const std::exception& e) {
    v.notes.push_back(std::string("spectrum scan failed: ") + e.what());
  }
  return v;
}

std::string cell_name(DiagramCell c) {
  switch (c) {
    case DiagramCell::Stable: return "stable";
    case DiagramCell::Unstable: return "unstable";
    case DiagramCell::Uncertain: return "uncertain";
  }
  return "?";
}

std::vector<DiagramEntry> diagram(int n, const std::vector<double>& a_grid, const std::vector<double>& alpha_grid,
                                  unsigned threads) {
  std::vector<DiagramEntry> out(a_grid.size() * alpha_grid.size());
  parallel_for(alpha_grid.size(), threads, [&](std::size_t i) {
    const auto spec = half_line_over_sphere(n, WarpingFunction::power(1.0, alpha_grid[i]));
    for (std::size_t j = 0; j < a_grid.size(); ++j) {
      auto hits = applicable_theorems(spec, a_grid[j]);
      DiagramEntry e{alpha_grid[i], a_grid[j], DiagramCell::Uncertain, ""};
      if (!hits.empty()) {
        e.cell = hits.front().stable ? DiagramCell::Stable : DiagramCell::Unstable;
        e.theorem = hits.front().id;
      }
      out[i * a_grid.size() + j] = e;
    }
  });
  return out;
}

}  // namespace warpstab
