#pragma once

#include <stdexcept>
#include <string>

namespace warpstab {

// Argument lies outside the evaluation domain of a warping function or interval.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// rho vanishes (or is negative) where a curvature quantity was requested.
class SingularPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A certificate family cannot be built for this manifold (e.g. no T with rho(T) = 2 rho(R)).
class FamilyInapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver-level failure: bracket failure, non-convergence, assembly with a bad weight.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Self-check failure, e.g. the direct and integrated-by-parts forms disagree.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace warpstab
