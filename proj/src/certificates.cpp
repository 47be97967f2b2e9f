#include "warpstab/certificates.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "warpstab/config.hpp"
#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/parallel.hpp"

namespace warpstab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_inside(const WarpedProductSpec& spec, double lo, double hi, const std::string& what) {
  const auto [a, b] = spec.open_range();
  if (!(lo > a) || !(hi < b) || !std::isfinite(hi))
    throw FamilyInapplicable(what + ": support [" + format_number(lo) + ", " + format_number(hi) + "] leaves " +
                             spec.describe());
}

std::string xi_mode_name(XiRampMode m) { return m == XiRampMode::AsPrinted ? "as_printed" : "pointwise"; }

}  // namespace

std::string family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::Kawai: return "kawai";
    case FamilyKind::PolyA: return "poly_a";
    case FamilyKind::PolyB: return "poly_b";
    case FamilyKind::Cone: return "cone";
  }
  return "?";
}

FamilyKind family_from_name(const std::string& name) {
  for (FamilyKind k : {FamilyKind::Kawai, FamilyKind::PolyA, FamilyKind::PolyB, FamilyKind::Cone})
    if (family_name(k) == name) return k;
  throw ConfigError("unknown certificate family '" + name + "' (kawai, poly_a, poly_b, cone)");
}

FamilyKind family_of(const FamilyParams& p) {
  return std::visit(Overloaded{
                        [](const KawaiParams&) { return FamilyKind::Kawai; },
                        [](const PolyParams& q) { return q.variant == PolyVariant::A ? FamilyKind::PolyA : FamilyKind::PolyB; },
                        [](const ConeParams&) { return FamilyKind::Cone; },
                    },
                    p);
}

std::string describe(const FamilyParams& p) {
  return std::visit(Overloaded{
                        [](const KawaiParams& k) { return "kawai(Q=" + format_number(k.q) + ", R=" + format_number(k.r) + ")"; },
                        [](const PolyParams& q) {
                          return family_name(q.variant == PolyVariant::A ? FamilyKind::PolyA : FamilyKind::PolyB) +
                                 "(R=" + format_number(q.r) + ", beta=" + format_number(q.beta) +
                                 (q.xi_mode == XiRampMode::Pointwise ? ", pointwise" : "") + ")";
                        },
                        [](const ConeParams& c) { return "cone(R=" + format_number(c.r) + ")"; },
                    },
                    p);
}

// ---- builders ---------------------------------------------------------------

double solve_doubling_radius(const WarpedProductSpec& spec, double R) {
  const auto [lo, hi] = spec.open_range();
  if (!(R > lo) || !(R < hi)) throw FamilyInapplicable("R outside the manifold");
  const double target = spec.warping.local(R).log_rho + std::log(2.0);
  auto f = [&](double t) { return spec.warping.local(t).log_rho - target; };
  const double hi_eff = spec.warping.is_sampled() ? hi : (std::isfinite(hi) ? hi * (1.0 - 1e-12) : hi);
  const double cap = std::min(64.0 * R, hi_eff);
  double b = R;
  do {
    b = std::min(2.0 * b, cap);
  } while (f(b) < 0.0 && b < cap);
  if (f(b) < 0.0) throw FamilyInapplicable("no T with rho(T) = 2 rho(R) within 64 R");
  boost::math::tools::eps_tolerance<double> tol(42);
  auto [x0, x1] = boost::math::tools::bisect(f, R, b, tol);
  return 0.5 * (x0 + x1);
}

RadialTestFunction build_f_QR(const WarpedProductSpec& spec, double Q, double R) {
  if (!(Q > 0.0) || !(Q < R)) throw PreconditionError("kawai family requires 0 < Q < R");
  const double e = -(spec.n - 1.0) / 2.0;
  const double T = solve_doubling_radius(spec, R);
  require_inside(spec, Q / 2.0, T, "kawai family");

  // rho must increase beyond Q for the construction to make sense.
  double prev = spec.warping.local(Q).log_rho;
  for (int i = 1; i <= 64; ++i) {
    const double r = Q * std::pow(T / Q, i / 64.0);
    const double cur = spec.warping.local(r).log_rho;
    if (!(cur > prev)) throw FamilyInapplicable("rho is not increasing beyond Q");
    prev = cur;
  }

  auto log_g = [&](double r) { return e * spec.warping.local(r).log_rho + 0.5 * std::log(r); };
  const double lgR = log_g(R), lgT = log_g(T);
  const double ratio = std::exp(lgT - lgR);  // g(T)/g(R)
  if (std::abs(1.0 - ratio) < 1e-12) throw FamilyInapplicable("g(T) = g(R): continuity constant undefined");
  const double C = 1.0 / (1.0 - ratio);
  const double sC = C > 0.0 ? 1.0 : -1.0, lC = std::log(std::abs(C));

  std::vector<Piece> pieces;
  pieces.push_back({Q / 2.0, Q, {Term{0.5 * std::log(Q), 1.0, {-1.0, 2.0}, Q, 0.0, e, 0.0}}});
  pieces.push_back({Q, R, {Term{0.0, 1.0, {1.0}, 1.0, 0.5, e, 0.0}}});
  pieces.push_back({R, T, {Term{lC, sC, {1.0}, 1.0, 0.5, e, 0.0}, Term{lC + lgT, -sC, {1.0}, 1.0, 0.0, 0.0, 0.0}}});
  return RadialTestFunction(std::move(pieces));
}

double default_growth_exponent(const WarpedProductSpec& spec) {
  const auto [lo, hi] = spec.open_range();
  const double a = std::max(1.0, lo), b = std::min(1e6, hi);
  if (!(b >= 10.0 * a)) throw PreconditionError("growth exponent needs a window of at least one decade beyond r = 1");
  return growth_exponent(spec, a, b).alpha;
}

RadialTestFunction build_f_Rbeta(const WarpedProductSpec& spec, double a, double R, double beta, PolyVariant variant,
                                 std::optional<double> alpha_in, XiRampMode mode) {
  if (!(R > 1.0) || !(beta > 1.0)) throw PreconditionError("power family requires R > 1 and beta > 1");
  const double alpha = alpha_in ? *alpha_in : default_growth_exponent(spec);
  const double n = spec.n;
  const double k = n * alpha - alpha - 1.0;
  const double e = variant == PolyVariant::A ? -2.0 * a * (n - 1.0) : -(n - 1.0) / 2.0;
  const double logR = std::log(R);
  if (beta * logR > 700.0) throw FamilyInapplicable("R^beta overflows");
  const double Rb = std::pow(R, beta);
  require_inside(spec, R / 2.0, 1.5 * Rb, "power family");

  std::vector<Piece> pieces;
  if (mode == XiRampMode::AsPrinted) {
    const double lxiR = log_xi(spec.warping.local(R), R, alpha);
    pieces.push_back({R / 2.0, R, {Term{-0.5 * k * logR + e * lxiR, 1.0, {-1.0, 2.0}, R, 0.0, 0.0, 0.0}}});
  } else {
    pieces.push_back({R / 2.0, R, {Term{-0.5 * k * logR, 1.0, {-1.0, 2.0}, R, 0.0, 0.0, e}}});
  }
  pieces.push_back({R, Rb, {Term{0.0, 1.0, {1.0}, 1.0, -0.5 * k, 0.0, e}}});
  pieces.push_back({Rb, 1.5 * Rb, {Term{-0.5 * beta * k * logR, 1.0, {3.0, -2.0}, Rb, 0.0, 0.0, e}}});
  return RadialTestFunction(std::move(pieces), alpha);
}

RadialTestFunction build_phi_R(const WarpedProductSpec& spec, double a, double R) {
  if (!(a > 0.0)) throw FamilyInapplicable("cone family requires a > 0");
  if (!(R > 1.0)) throw PreconditionError("cone family requires R > 1");
  require_inside(spec, 0.5, 2.0 * R, "cone family");
  const double n = spec.n;
  const double p = (-n * a + 3.0 * a + 1.0) / (2.0 * a);
  std::vector<Piece> pieces;
  pieces.push_back({0.5, 1.0, {Term{0.0, 1.0, {-1.0, 2.0}, 1.0, 0.0, 0.0, 0.0}}});
  pieces.push_back({1.0, R, {Term{0.0, 1.0, {1.0}, 1.0, p, 0.0, 0.0}}});
  pieces.push_back({R, 2.0 * R, {Term{p * std::log(R), 1.0, {2.0, -1.0}, R, 0.0, 0.0, 0.0}}});
  return RadialTestFunction(std::move(pieces));
}

RadialTestFunction build_family(const WarpedProductSpec& spec, double a, const FamilyParams& params,
                                std::optional<double> alpha) {
  return std::visit(Overloaded{
                        [&](const KawaiParams& k) { return build_f_QR(spec, k.q, k.r); },
                        [&](const PolyParams& q) { return build_f_Rbeta(spec, a, q.r, q.beta, q.variant, alpha, q.xi_mode); },
                        [&](const ConeParams& c) { return build_phi_R(spec, a, c.r); },
                    },
                    params);
}

// ---- certificates -------------------------------------------------------------

RadialTestFunction InstabilityCertificate::rebuild() const { return build_family(spec, a, params, growth_exponent); }

double InstabilityCertificate::reevaluate(const QuadratureSpec& quad) const {
  return quad_form_ibp(spec, a, rebuild(), quad);
}

nlohmann::json InstabilityCertificate::to_json() const {
  nlohmann::json j;
  j["type"] = "instability_certificate";
  nlohmann::json s = nlohmann::json::object();
  const KeyValueConfig cfg = spec_to_config(spec);
  for (const auto& [k, v] : cfg.entries()) s[k] = v;
  j["spec"] = s;
  j["a"] = a;
  nlohmann::json p;
  p["family"] = family_name(family_of(params));
  std::visit(Overloaded{
                 [&](const KawaiParams& k) {
                   p["Q"] = k.q;
                   p["R"] = k.r;
                 },
                 [&](const PolyParams& q) {
                   p["R"] = q.r;
                   p["beta"] = q.beta;
                   p["xi_mode"] = xi_mode_name(q.xi_mode);
                 },
                 [&](const ConeParams& c) { p["R"] = c.r; },
             },
             params);
  j["params"] = p;
  j["growth_exponent"] = growth_exponent ? nlohmann::json(*growth_exponent) : nlohmann::json();
  j["q_value"] = q_value;
  j["q0"] = q0;
  j["g"] = g;
  j["magnitude"] = magnitude;
  j["rayleigh"] = rayleigh;
  j["critical_a"] = critical_a ? nlohmann::json(*critical_a) : nlohmann::json();
  return j;
}

InstabilityCertificate InstabilityCertificate::from_json(const nlohmann::json& j) {
  try {
    KeyValueConfig cfg;
    for (const auto& [k, v] : j.at("spec").items()) cfg.set(k, v.get<std::string>());
    const WarpedProductSpec spec = spec_from_config(cfg);
    const auto& p = j.at("params");
    const FamilyKind kind = family_from_name(p.at("family").get<std::string>());
    FamilyParams params;
    switch (kind) {
      case FamilyKind::Kawai: params = KawaiParams{p.at("Q").get<double>(), p.at("R").get<double>()}; break;
      case FamilyKind::PolyA:
      case FamilyKind::PolyB:
        params = PolyParams{p.at("R").get<double>(), p.at("beta").get<double>(),
                            kind == FamilyKind::PolyA ? PolyVariant::A : PolyVariant::B,
                            p.value("xi_mode", "as_printed") == "pointwise" ? XiRampMode::Pointwise : XiRampMode::AsPrinted};
        break;
      case FamilyKind::Cone: params = ConeParams{p.at("R").get<double>()}; break;
    }
    std::optional<double> ge, ca;
    if (j.contains("growth_exponent") && !j["growth_exponent"].is_null()) ge = j["growth_exponent"].get<double>();
    if (j.contains("critical_a") && !j["critical_a"].is_null()) ca = j["critical_a"].get<double>();
    return InstabilityCertificate{spec,
                                  j.at("a").get<double>(),
                                  params,
                                  ge,
                                  j.at("q_value").get<double>(),
                                  j.value("q0", 0.0),
                                  j.value("g", 0.0),
                                  j.value("magnitude", 0.0),
                                  j.value("rayleigh", 0.0),
                                  ca};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed certificate record: ") + e.what());
  }
}

// ---- search -------------------------------------------------------------------

std::vector<FamilyKind> default_families() {
  return {FamilyKind::PolyA, FamilyKind::PolyB, FamilyKind::Kawai, FamilyKind::Cone};
}

std::vector<FamilyParams> candidate_grid(const WarpedProductSpec&, double a, const std::vector<FamilyKind>& families,
                                         const SearchBudget& budget) {
  std::vector<FamilyParams> out;
  for (FamilyKind k : families) {
    switch (k) {
      case FamilyKind::Kawai:
        for (double q : budget.kawai_q)
          for (double r : budget.kawai_r)
            if (r > q) out.push_back(KawaiParams{q, r});
        break;
      case FamilyKind::PolyA:
      case FamilyKind::PolyB:
        for (double r : budget.poly_r)
          for (double b : budget.betas)
            out.push_back(PolyParams{r, b, k == FamilyKind::PolyA ? PolyVariant::A : PolyVariant::B, budget.xi_mode});
        break;
      case FamilyKind::Cone:
        if (a > 0.0)
          for (double r : budget.cone_r) out.push_back(ConeParams{r});
        break;
    }
  }
  return out;
}

SearchOutcome search_instability(const WarpedProductSpec& spec, double a, const std::vector<FamilyKind>& families,
                                 const SearchBudget& budget, const QuadratureSpec& quad) {
  const auto cands = candidate_grid(spec, a, families, budget);

  // The growth exponent is shared by every poly candidate; fit it once.
  std::optional<double> alpha;
  const bool wants_poly = std::any_of(families.begin(), families.end(), [](FamilyKind k) {
    return k == FamilyKind::PolyA || k == FamilyKind::PolyB;
  });
  NotFound nf;
  if (wants_poly) {
    try {
      alpha = default_growth_exponent(spec);
    } catch (const PreconditionError& e) {
      nf.notes.push_back(std::string("power families skipped: ") + e.what());
    }
  }

  struct Eval {
    bool ok = false;
    AffineForm form;
    std::string error;
  };
  const std::size_t chunk = std::max(1u, budget.threads);
  for (std::size_t start = 0; start < cands.size(); start += chunk) {
    const std::size_t count = std::min(chunk, cands.size() - start);
    std::vector<Eval> evals(count);
    parallel_for(count, budget.threads, [&](std::size_t i) {
      const FamilyParams& p = cands[start + i];
      if (std::holds_alternative<PolyParams>(p) && !alpha) return;
      try {
        const RadialTestFunction f = build_family(spec, a, p, alpha);
        evals[i].form = a_decomposition(spec, f, quad);
        evals[i].ok = true;
      } catch (const FamilyInapplicable& e) {
        evals[i].error = e.what();
      } catch (const QuadratureError& e) {
        evals[i].error = e.what();
      } catch (const PreconditionError& e) {
        evals[i].error = e.what();
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      const FamilyParams& p = cands[start + i];
      ++nf.candidates;
      if (!evals[i].ok) {
        ++nf.skipped;
        continue;
      }
      const AffineForm& F = evals[i].form;
      const double q = F.at(a);
      const double ray = F.rayleigh(a);
      if (ray < nf.best_rayleigh) {
        nf.best_rayleigh = ray;
        nf.best_q = q;
        nf.best_params = p;
      }
      if (q < -budget.negativity * F.magnitude(a)) {
        const auto crit = F.critical_a();
        // Q_a is affine in a with Q0 >= 0, so negativity forces G < 0 and a > a*.
        if (!crit || !(a > *crit))
          throw InternalError("negative form without a consistent critical parameter for " + describe(p));
        const bool poly = std::holds_alternative<PolyParams>(p);
        return InstabilityCertificate{spec, a, p, poly ? alpha : std::nullopt, q, F.q0, F.g, F.magnitude(a), ray, crit};
      }
    }
  }
  return nf;
}

}  // namespace warpstab
