#pragma once

#include <stdexcept>

namespace weinstock {

/// An argument violates a documented precondition (negative radius,
/// dimension below two, non-positive profile, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed: non-convergence, indefinite discrete
/// operator, or a state the underlying hypotheses exclude (H <= 0 along a
/// flow, loss of star-shapedness after recentering).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weinstock
