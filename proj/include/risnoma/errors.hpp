#pragma once

#include <stdexcept>
#include <string>

#include "risnoma/types.hpp"

namespace risnoma {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Matrix or vector dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Optimizer state violates its invariants (e.g. nonpositive fixed points).
class StateError : public Error {
 public:
  using Error::Error;
};

// The QoS floors cannot be met for the given channels.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The conic backend failed in a way that is not an infeasibility verdict.
class SolverError : public Error {
 public:
  using Error::Error;
};

// The rank-one relaxation stopped making progress. Carries the best
// accepted iterate so callers can still use it.
class StallError : public Error {
 public:
  StallError(const std::string& what, CMatrix best, double best_objective)
      : Error(what), best_(std::move(best)), best_objective_(best_objective) {}

  const CMatrix& best() const { return best_; }
  double best_objective() const { return best_objective_; }

 private:
  CMatrix best_;
  double best_objective_;
};

}  // namespace risnoma
