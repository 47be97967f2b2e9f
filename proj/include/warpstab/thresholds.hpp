#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "warpstab/certificates.hpp"
#include "warpstab/geometry.hpp"
#include "warpstab/spectrum.hpp"

namespace warpstab {

using Rational = boost::rational<long long>;

// ---- catalog ------------------------------------------------------------------

namespace catalog {

double yamabe(int n);                      // (n-2)/(4(n-1))
double kawai_end(int n);                   // (n-1)/(4n)
double h(int n, double zeta);              // (n z - z - 1)^2 / (4 z (n-1)(n z - 2)), z > 1
double bounded_slope(int n, double C);     // (C^2+1)(n-2)/(4 C^2 (n-1)); +inf at C = 0
double linear_lower(int n, double C1);     // C1 > 1
double linear_upper(int n, double C2);     // 0 < C2 < 1; negative
double cone_flat(int n);                   // (n-2)^2/(4(n-1))
double simons(int m);                      // (2m-3)^2/(8(m-1))
double catenoid(int n);                    // (n-2)/n

// Surfaces: flatness bound for nonpositive curvature, hyperbolic plane bottom, and the
// volume-growth instability bound (alpha-1)/(8 alpha).
inline constexpr double dim2_flatness = 1.0 / 8.0;
inline constexpr double dim2_hyperbolic = 1.0 / 4.0;
double dim2_volume_growth(double alpha);

namespace exact {
Rational yamabe(int n);
Rational kawai_end(int n);
Rational h(int n, Rational zeta);
Rational bounded_slope(int n, Rational C);
Rational cone_flat(int n);
Rational simons(int m);
Rational catenoid(int n);
}  // namespace exact

}  // namespace catalog

struct HCurvePoint {
  double zeta, h;
};

// Tabulates h(n, .) and asserts strict monotonicity along the sorted grid.
std::vector<HCurvePoint> h_curve(int n, const std::vector<double>& zeta_grid);

// ---- theorem checks -------------------------------------------------------------

struct HypothesisCheck {
  std::string condition;
  bool satisfied;
  std::string method;  // "closed form", "sampled ...", "unverifiable", ...
};

struct TheoremHit {
  std::string id;         // descriptive id, e.g. "power-envelope"
  std::string statement;  // condition on a, e.g. "a > h(n, alpha) = 0.140625"
  bool stable;
  double threshold;
  std::vector<HypothesisCheck> checks;
};

// Every theorem whose hypotheses hold for (spec, a), in checking order. Sampled warpings give
// an empty list. More than one hit is possible; stable and unstable hits never coexist.
std::vector<TheoremHit> applicable_theorems(const WarpedProductSpec& spec, double a,
                                            std::vector<HypothesisCheck>* report = nullptr);

enum class VerdictStatus { StableByTheorem, UnstableByTheorem, UnstableByCertificate, UnstableBySpectrum, Undetermined };
std::string status_name(VerdictStatus s);

struct StabilityVerdict {
  VerdictStatus status = VerdictStatus::Undetermined;
  std::optional<TheoremHit> theorem;
  std::optional<InstabilityCertificate> certificate;
  std::optional<UnstableOn> spectrum;
  std::optional<double> best_lambda1;
  std::optional<double> best_rayleigh;
  std::vector<HypothesisCheck> report;  // every hypothesis examined
  std::vector<std::string> notes;

  bool stable() const { return status == VerdictStatus::StableByTheorem; }
  bool unstable() const {
    return status == VerdictStatus::UnstableByTheorem || status == VerdictStatus::UnstableByCertificate ||
           status == VerdictStatus::UnstableBySpectrum;
  }
  // Theorem id or the numeric evidence; never empty.
  std::string provenance() const;
};

struct ClassifyOptions {
  bool numeric = true;  // fall back to certificate search and the spectrum scan
  SearchBudget budget;
  QuadratureSpec quad;
  unsigned threads = 1;
};

StabilityVerdict classify(const WarpedProductSpec& spec, double a, const ClassifyOptions& opts = {});

// ---- diagram --------------------------------------------------------------------

enum class DiagramCell { Stable, Unstable, Uncertain };
std::string cell_name(DiagramCell c);

struct DiagramEntry {
  double alpha, a;
  DiagramCell cell;
  std::string theorem;  // empty for uncertain cells
};

// rho = r^alpha on a half line over the unit sphere; theorems only.
std::vector<DiagramEntry> diagram(int n, const std::vector<double>& a_grid, const std::vector<double>& alpha_grid,
                                  unsigned threads = 1);

}  // namespace warpstab
