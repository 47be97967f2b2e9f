#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "warpstab/geometry.hpp"

namespace warpstab {

enum class GridKind { Uniform, Logarithmic };

std::string grid_name(GridKind g);

// N cells on [b, c]. With b = 0 on a boundaryless half line the first node sits at h/2
// and the flux through r = 0 is zero (regularity instead of Dirichlet).
struct Discretization {
  double b = 0.0, c = 1.0;
  std::size_t N = 2048;
  GridKind grid = GridKind::Uniform;

  void validate() const;
};

// Finite-volume pencil for int u'^2 w + a S u^2 w against int u^2 w, w = rho^{n-1}.
// Stored in log form: edge conductances K and node masses m can span hundreds of
// orders of magnitude on wide domains.
struct Pencil {
  std::vector<double> nodes;      // unknown locations (Dirichlet nodes eliminated)
  std::vector<double> log_mass;   // log B_ii
  std::vector<double> log_cond;   // log K between unknown j and j+1; size nodes.size() + 1 (outer edges included)
  std::vector<double> potential;  // a S(r_j)
  bool regular_origin = false;    // first edge has zero conductance

  std::size_t size() const { return nodes.size(); }
  // Raw entries (may overflow for extreme domains; the solver never uses them).
  double A_diag(std::size_t j) const;
  double A_off(std::size_t j) const;  // A_{j, j+1}
  double B_diag(std::size_t j) const;

  // Scaled symmetric tridiagonal T = B^{-1/2} A B^{-1/2}; same eigenvalues as A - lambda B.
  void scaled(std::vector<double>& diag, std::vector<double>& off_sq, std::vector<double>& off) const;
};

Pencil assemble(const WarpedProductSpec& spec, double a, const Discretization& disc);

struct EigenOptions {
  bool grid_doubling = true;
  bool compute_lambda2 = true;
  std::size_t max_nodes = std::size_t{1} << 20;
};

struct EigenResult {
  double lambda1 = 0.0;
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> nodes;
  std::vector<double> eigenvector;  // node values of u, max |u| = 1, positive
  double residual = 0.0;            // ||T x - lambda x|| / ||x|| in the scaled form
  double lambda1_fine = std::numeric_limits<double>::quiet_NaN();  // 2N cells
  double richardson = std::numeric_limits<double>::quiet_NaN();
  std::size_t N = 0;
  int bisection_steps = 0;
};

// Smallest eigenvalue of the pencil by Sturm-count bisection (relative accuracy near 0),
// eigenvector by shifted inverse iteration.
EigenResult first_eigenvalue(const WarpedProductSpec& spec, double a, const Discretization& disc,
                             const EigenOptions& opts = {});

struct UnstableOn {
  Discretization domain;
  double lambda1;
};
struct NoNegativeFound {
  double smallest_lambda1;
  Discretization at;
};
using ScanOutcome = std::variant<UnstableOn, NoNegativeFound>;

// Nested domains growing by factors of 2. Polynomial-type warpings use a logarithmic
// grid on [b0, b0 2^k]; exponential ones and full lines use uniform grids.
std::vector<Discretization> default_schedule(const WarpedProductSpec& spec);

// lambda1 counts as negative when below -1e-8 pi^2/(c-b)^2, i.e. relative to the
// Dirichlet scale of the domain itself.
double negativity_tolerance(const Discretization& d);

struct ScanStep {
  Discretization domain;
  double lambda1;
};

ScanOutcome stability_scan(const WarpedProductSpec& spec, double a, const std::vector<Discretization>& schedule,
                           unsigned threads = 1, std::vector<ScanStep>* trace = nullptr);
inline ScanOutcome stability_scan(const WarpedProductSpec& spec, double a) {
  return stability_scan(spec, a, default_schedule(spec));
}

}  // namespace warpstab
