#pragma once

#include <stdexcept>
#include <string>

namespace pointflow {

/// Precondition on an argument was violated (bad size, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point or object lies outside the admissible geometric domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Point location failed: the query lies outside the mesh beyond tolerance.
class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The factorization of a saddle-point matrix broke down.
///
/// `rcond` carries the reciprocal condition estimate available at the time of
/// failure (0 when the factorization itself reported a zero pivot).
class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// A nonlinear solve did not reach its tolerance within the iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant was broken; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pointflow
