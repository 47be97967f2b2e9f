#include "warpstab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"
#include "warpstab/parallel.hpp"

namespace warpstab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-290;

struct Scaled {
  std::vector<double> diag, off_sq, off;
};

int sturm_count(const Scaled& T, double sigma, double pivmin) {
  int neg = 0;
  double d = T.diag[0] - sigma;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++neg;
  for (std::size_t j = 1; j < T.diag.size(); ++j) {
    d = (T.diag[j] - sigma) - T.off_sq[j - 1] / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++neg;
  }
  return neg;
}

struct Bracket {
  double lo, hi;
  int steps;
};

// Smallest lambda with count(lambda) >= k. Midpoints are geometric once the bracket has a
// fixed sign, so eigenvalues near 0 (1e-30 on wide domains) come out with relative accuracy.
Bracket bisect_eigenvalue(const Scaled& T, int k, double glo, double ghi, double pivmin) {
  double lo = glo, hi = ghi;
  if (sturm_count(T, lo, pivmin) >= k || sturm_count(T, hi, pivmin) < k)
    throw NumericError("eigenvalue bracket failure: Gershgorin interval [" + format_number(glo) + ", " +
                       format_number(ghi) + "] does not enclose eigenvalue " + std::to_string(k));
  if (lo < 0.0 && hi > 0.0) {
    if (sturm_count(T, 0.0, pivmin) >= k)
      hi = 0.0;
    else
      lo = 0.0;
  }
  int steps = 0;
  for (; steps < 400; ++steps) {
    const double width = hi - lo;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
    if (hi > 0.0 && hi < kTiny && lo >= 0.0) break;
    if (lo < 0.0 && lo > -kTiny && hi <= 0.0) break;
    double mid;
    if (lo >= 0.0) {
      const double l = std::max(lo, kTiny);
      mid = (hi / l > 4.0) ? std::sqrt(l) * std::sqrt(hi) : 0.5 * (lo + hi);
    } else if (hi <= 0.0) {
      const double h = std::max(-hi, kTiny);
      mid = (-lo / h > 4.0) ? -std::sqrt(h) * std::sqrt(-lo) : 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (sturm_count(T, mid, pivmin) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return {lo, hi, steps};
}

double log_weight(const WarpedProductSpec& spec, double r) {
  const double lw = (spec.n - 1.0) * spec.warping.local(r).log_rho;
  if (!std::isfinite(lw)) throw NumericError("non-positive weight rho^{n-1} at r = " + format_number(r));
  return lw;
}

bool exponential_kind(const WarpingFunction& w) {
  return std::holds_alternative<Sinh>(w.kind()) || std::holds_alternative<Cosh>(w.kind());
}

}  // namespace

std::string grid_name(GridKind g) { return g == GridKind::Uniform ? "uniform" : "log"; }

void Discretization::validate() const {
  if (N < 16) throw PreconditionError("discretization needs N >= 16 cells");
  if (!(c > b) || !std::isfinite(b) || !std::isfinite(c)) throw PreconditionError("discretization needs b < c");
  if (grid == GridKind::Logarithmic && !(b > 0.0)) throw PreconditionError("logarithmic grid needs b > 0");
}

double Pencil::A_diag(std::size_t j) const {
  return std::exp(log_cond[j]) + std::exp(log_cond[j + 1]) + potential[j] * std::exp(log_mass[j]);
}
double Pencil::A_off(std::size_t j) const { return -std::exp(log_cond[j + 1]); }
double Pencil::B_diag(std::size_t j) const { return std::exp(log_mass[j]); }

void Pencil::scaled(std::vector<double>& diag, std::vector<double>& off_sq, std::vector<double>& off) const {
  const std::size_t n = size();
  diag.resize(n);
  off_sq.assign(n > 0 ? n - 1 : 0, 0.0);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = log_cond[j] == kNegInf ? 0.0 : std::exp(log_cond[j] - log_mass[j]);
    diag[j] = left + std::exp(log_cond[j + 1] - log_mass[j]) + potential[j];
    if (j + 1 < n) {
      off_sq[j] = std::exp(2.0 * log_cond[j + 1] - log_mass[j] - log_mass[j + 1]);
      off[j] = -std::exp(log_cond[j + 1] - 0.5 * (log_mass[j] + log_mass[j + 1]));
    }
  }
}

Pencil assemble(const WarpedProductSpec& spec, double a, const Discretization& d) {
  d.validate();
  const auto [lo, hi] = spec.open_range();
  if (d.b < lo || d.c > hi)
    throw PreconditionError("domain [" + format_number(d.b) + ", " + format_number(d.c) + "] outside " + spec.describe());
  Pencil P;
  P.regular_origin = spec.is_half_line() && d.b == 0.0 && is_boundaryless(spec);
  const std::size_t N = d.N;

  auto add_node = [&](double x, double log_measure) {
    P.nodes.push_back(x);
    P.log_mass.push_back(log_weight(spec, x) + log_measure);
    P.potential.push_back(a == 0.0 ? 0.0 : a * scalar_curvature(spec, spec.warping.local(x)));
  };

  if (d.grid == GridKind::Uniform && P.regular_origin) {
    const double h = d.c / (N + 0.5);
    const double lh = std::log(h);
    P.log_cond.push_back(kNegInf);
    for (std::size_t j = 0; j < N; ++j) {
      add_node((j + 0.5) * h, lh);
      P.log_cond.push_back(log_weight(spec, (j + 1) * h) - lh);
    }
  } else if (d.grid == GridKind::Uniform) {
    const double h = (d.c - d.b) / N;
    const double lh = std::log(h);
    for (std::size_t j = 0; j < N; ++j) {
      P.log_cond.push_back(log_weight(spec, d.b + (j + 0.5) * h) - lh);
      if (j + 1 < N) add_node(d.b + (j + 1) * h, lh);
    }
  } else {
    // t = log r: int u_r^2 w dr = int u_t^2 (w/r) dt and int u^2 w dr = int u^2 w r dt.
    const double t0 = std::log(d.b), dt = std::log(d.c / d.b) / N, ldt = std::log(dt);
    for (std::size_t j = 0; j < N; ++j) {
      const double te = t0 + (j + 0.5) * dt;
      P.log_cond.push_back(log_weight(spec, std::exp(te)) - te - ldt);
      if (j + 1 < N) {
        const double tn = t0 + (j + 1) * dt;
        add_node(std::exp(tn), tn + ldt);
      }
    }
  }
  return P;
}

namespace {

EigenResult solve_pencil(const Pencil& P, bool want_lambda2) {
  Scaled T;
  P.scaled(T.diag, T.off_sq, T.off);
  const std::size_t n = P.size();
  double glo = std::numeric_limits<double>::infinity(), ghi = -glo, max_off = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = (j > 0 ? std::abs(T.off[j - 1]) : 0.0) + (j + 1 < n ? std::abs(T.off[j]) : 0.0);
    glo = std::min(glo, T.diag[j] - r);
    ghi = std::max(ghi, T.diag[j] + r);
    if (j + 1 < n) max_off = std::max(max_off, T.off_sq[j]);
    if (!std::isfinite(T.diag[j])) throw NumericError("non-finite pencil entry at r = " + format_number(P.nodes[j]));
  }
  const double spread = std::max(std::abs(glo), std::abs(ghi));
  glo -= 1e-12 * spread + kTiny;
  ghi += 1e-12 * spread + kTiny;
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off);

  EigenResult out;
  const Bracket b1 = bisect_eigenvalue(T, 1, glo, ghi, pivmin);
  out.lambda1 = 0.5 * (b1.lo + b1.hi);
  out.bisection_steps = b1.steps;
  if (want_lambda2 && n >= 2) {
    const Bracket b2 = bisect_eigenvalue(T, 2, b1.lo, ghi, pivmin);
    out.lambda2 = 0.5 * (b2.lo + b2.hi);
  }

  // Shifted inverse iteration just below lambda1: T - sigma I is positive definite, so the
  // plain Thomas sweep is stable.
  double sigma = b1.lo - 1e-14 * std::abs(b1.lo) - kTiny;
  std::vector<double> x(n, 1.0), cp(n), dp(n);
  for (int it = 0; it < 4; ++it) {
    for (int attempt = 0;; ++attempt) {
      bool ok = true;
      double denom = T.diag[0] - sigma;
      if (!(denom > 0.0)) ok = false;
      cp[0] = n > 1 ? T.off[0] / denom : 0.0;
      dp[0] = x[0] / denom;
      for (std::size_t j = 1; ok && j < n; ++j) {
        denom = (T.diag[j] - sigma) - T.off[j - 1] * cp[j - 1];
        if (!(denom > 0.0)) ok = false;
        cp[j] = j + 1 < n ? T.off[j] / denom : 0.0;
        dp[j] = (x[j] - T.off[j - 1] * dp[j - 1]) / denom;
      }
      if (ok) break;
      if (attempt > 60) throw NumericError("inverse iteration: shift could not be made positive definite");
      sigma -= std::max(1e-12 * std::abs(sigma), 1e-12 * spread * std::pow(2.0, attempt));
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = dp[j] - cp[j] * x[j + 1];
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    if (!(mx > 0.0) || !std::isfinite(mx)) throw NumericError("inverse iteration produced a degenerate vector");
    for (double& v : x) v /= mx;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum < 0.0)
    for (double& v : x) v = -v;

  double rn = 0.0, xn = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double tx = T.diag[j] * x[j];
    if (j > 0) tx += T.off[j - 1] * x[j - 1];
    if (j + 1 < n) tx += T.off[j] * x[j + 1];
    const double r = tx - out.lambda1 * x[j];
    rn += r * r;
    xn += x[j] * x[j];
  }
  out.residual = std::sqrt(rn / xn);
  // Relative to the operator scale: ||T|| grows like N^2 even when lambda1 is tiny.
  const double rtol = 1e-10 * spread + 1e-8 * std::abs(out.lambda1);
  if (out.residual > rtol)
    throw NumericError("eigen residual " + format_number(out.residual) + " exceeds " + format_number(rtol));

  // u = B^{-1/2} x, normalized to max |u| = 1 through logs.
  std::vector<double> lu(n);
  double lmax = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    lu[j] = x[j] == 0.0 ? kNegInf : std::log(std::abs(x[j])) - 0.5 * P.log_mass[j];
    lmax = std::max(lmax, lu[j]);
  }
  out.eigenvector.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    out.eigenvector[j] = lu[j] == kNegInf ? 0.0 : std::copysign(std::exp(lu[j] - lmax), x[j]);
  out.nodes = P.nodes;
  return out;
}

}  // namespace

EigenResult first_eigenvalue(const WarpedProductSpec& spec, double a, const Discretization& disc,
                             const EigenOptions& opts) {
  EigenResult out = solve_pencil(assemble(spec, a, disc), opts.compute_lambda2);
  out.N = disc.N;
  for (double v : out.eigenvector)
    if (v < -1e-8) throw NumericError("first eigenvector changes sign");
  if (opts.grid_doubling && 2 * disc.N <= opts.max_nodes) {
    Discretization fine = disc;
    fine.N = 2 * disc.N;
    out.lambda1_fine = solve_pencil(assemble(spec, a, fine), false).lambda1;
    out.richardson = out.lambda1_fine + (out.lambda1_fine - out.lambda1) / 3.0;
  }
  return out;
}

double negativity_tolerance(const Discretization& d) {
  const double L = d.c - d.b;
  return 1e-8 * std::numbers::pi * std::numbers::pi / (L * L);
}

std::vector<Discretization> default_schedule(const WarpedProductSpec& spec) {
  std::vector<Discretization> out;
  const auto [lo, hi] = spec.open_range();
  constexpr std::size_t cap = std::size_t{1} << 18;
  auto cells = [&](double per, double len) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(per * len), 256, cap);
  };
  if (const auto* s = std::get_if<Segment>(&spec.interval)) {
    out.push_back({std::max(s->b, lo), std::min(s->c, hi), 4096, GridKind::Uniform});
    return out;
  }
  if (spec.is_full_line()) {
    for (int k = 0; k <= 12; ++k) {
      const double R = std::ldexp(1.0, k);
      if (-R < lo || R > hi) break;
      out.push_back({-R, R, cells(256.0, 2.0 * R), GridKind::Uniform});
    }
    return out;
  }
  const bool boundaryless = is_boundaryless(spec);
  if (boundaryless || (exponential_kind(spec.warping) && lo <= 0.0)) {
    for (int k = 0; k <= 12; ++k) {
      const double c = std::ldexp(1.0, k);
      if (c > hi) break;
      out.push_back({0.0, c, cells(256.0, c), GridKind::Uniform});
    }
    return out;
  }
  const double b0 = std::max(1.0, lo);
  for (int k = 1; k <= 20; ++k) {
    const double c = std::ldexp(b0, k);
    if (c > hi) break;
    out.push_back({b0, c, cells(256.0, k), GridKind::Logarithmic});
  }
  return out;
}

ScanOutcome stability_scan(const WarpedProductSpec& spec, double a, const std::vector<Discretization>& schedule,
                           unsigned threads, std::vector<ScanStep>* trace) {
  if (schedule.empty()) throw PreconditionError("empty domain schedule");
  EigenOptions opts;
  opts.grid_doubling = false;
  opts.compute_lambda2 = false;
  std::vector<double> lambdas(schedule.size(), std::numeric_limits<double>::quiet_NaN());
  auto solve = [&](std::size_t i) { lambdas[i] = first_eigenvalue(spec, a, schedule[i], opts).lambda1; };

  NoNegativeFound best{std::numeric_limits<double>::infinity(), schedule.front()};
  if (threads > 1) parallel_for(schedule.size(), threads, solve);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (threads <= 1) solve(i);
    if (trace) trace->push_back({schedule[i], lambdas[i]});
    if (lambdas[i] < -negativity_tolerance(schedule[i])) return UnstableOn{schedule[i], lambdas[i]};
    if (lambdas[i] < best.smallest_lambda1) best = {lambdas[i], schedule[i]};
  }
  return best;
}

}  // namespace warpstab
