#pragma once

#include <stdexcept>
#include <string>

namespace maxent {

// Error taxonomy. Everything derives from maxent::Error so callers can catch
// the whole family; the subtypes mirror the failure classes of the library:
//
//   DomainError       - inputs violate a precondition (infeasible theta,
//                       disconnected graph, dimension mismatch, ...)
//   ValidationError   - an instance file is well-formed JSON but inconsistent
//                       (declared bounds below recomputed ones, bad payload)
//   ParseError        - malformed instance / report files
//   NumericalError    - a computation lost too much precision to continue
//                       (tiny pivots, non-positive Laplacian pivots)
//   ConvergenceError  - iteration budget exhausted before the requested
//                       certificate; carries diagnostics via what()
//   IntegrityError    - an internal consistency check failed; indicates a bug
//                       or an inconsistent facet system, never user error
//   BudgetError       - a combinatorial size guard tripped (enumerations)

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& msg) : Error(msg) {}
};

}  // namespace maxent
