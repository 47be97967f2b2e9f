#pragma once

#include <cmath>
#include <algorithm>
#include <limits>
#include <vector>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "warpstab/errors.hpp"
#include "warpstab/format.hpp"

namespace warpstab {

struct QuadratureSpec {
  double relative_tolerance = 1e-10;
  unsigned max_depth = 40;

  void validate() const {
    if (!(relative_tolerance > 0.0)) throw PreconditionError("quadrature tolerance must be positive");
    if (max_depth == 0) throw PreconditionError("quadrature depth must be positive");
  }
};

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

namespace detail {

struct Panel {
  double a, b, value, error, l1;
  unsigned depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Globally adaptive bisection driven by Boost's 21-point Gauss-Kronrod rule. The stopping
// test is relative to int |f| rather than |int f|: the a-linear part of the stability form
// cancels to ~0 in flat space, and an estimate-relative test would never terminate there.
template <class F>
IntegralEstimate adaptive_gk(F& f, double lo, double hi, const QuadratureSpec& q, double floor) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  auto panel = [&](double a, double b, unsigned depth) {
    Panel p{a, b, 0.0, 0.0, 0.0, depth};
    p.value = Rule::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
    return p;
  };
  constexpr std::size_t max_panels = 4096;
  std::vector<Panel> heap{panel(lo, hi, 0)};
  double value = heap[0].value, error = heap[0].error, l1 = heap[0].l1;
  std::vector<Panel> finished;  // panels at max depth
  while (!heap.empty() && error > q.relative_tolerance * l1 + floor && heap.size() + finished.size() < max_panels) {
    std::pop_heap(heap.begin(), heap.end());
    Panel p = heap.back();
    heap.pop_back();
    if (p.depth >= q.max_depth) {
      finished.push_back(p);
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    Panel L = panel(p.a, mid, p.depth + 1), R = panel(mid, p.b, p.depth + 1);
    value += L.value + R.value - p.value;
    error += L.error + R.error - p.error;
    l1 += L.l1 + R.l1 - p.l1;
    heap.push_back(L);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(R);
    std::push_heap(heap.begin(), heap.end());
  }
  // Re-sum to shed the drift of the running updates.
  value = error = l1 = 0.0;
  for (const auto* set : {&heap, &finished})
    for (const Panel& p : *set) value += p.value, error += p.error, l1 += p.l1;
  return {value, error, l1};
}

}  // namespace detail

// Adaptive quadrature on [lo, hi]. Panels with hi/lo > 8 and lo > 0 are integrated in
// t = log r, which keeps power-law integrands over many decades cheap and well resolved.
// `floor` is an absolute error allowance for integrands that vanish up to rounding.
template <class F>
IntegralEstimate integrate(F&& f, double lo, double hi, const QuadratureSpec& q, double floor = 0.0) {
  if (!(hi > lo)) return {};
  IntegralEstimate out;
  if (lo > 0.0 && hi / lo > 8.0) {
    auto g = [&](double t) {
      const double r = std::exp(t);
      return f(r) * r;
    };
    out = detail::adaptive_gk(g, std::log(lo), std::log(hi), q, floor);
  } else {
    out = detail::adaptive_gk(f, lo, hi, q, floor);
  }
  if (!std::isfinite(out.value) || !std::isfinite(out.error))
    throw QuadratureError("non-finite integral on [" + format_number(lo) + ", " + format_number(hi) + "]");
  if (out.error > 1e3 * (q.relative_tolerance * out.l1 + floor) + std::numeric_limits<double>::min())
    throw QuadratureError("quadrature did not converge on [" + format_number(lo) + ", " + format_number(hi) +
                          "]: error " + format_number(out.error) + ", L1 " + format_number(out.l1));
  return out;
}

}  // namespace warpstab
