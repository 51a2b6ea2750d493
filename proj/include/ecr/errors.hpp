#pragma once

#include <stdexcept>
#include <string>

namespace ecr {

/// Elimination pivot vanished (or fell below the breakdown threshold) in a
/// shifted tridiagonal solve. Signals a violated positive-definiteness
/// precondition rather than a recoverable state.
struct ZeroPivotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A pivot of the DETGTRI recurrence is exactly zero under the throwing policy.
struct PivotBreakdownError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Similarity symmetrization requires a_{i+1} * c_i > 0 for every off-diagonal pair.
struct NotSymmetrizableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Block index is not valid for the requested reduction level.
struct IndexOutOfGridError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Mismatched zero/factor sequence lengths in a shift chain.
struct LengthMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense elimination broke down in an oracle solve.
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative oracle failed to reach its tolerance within the sweep cap.
struct NoConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An error-bound formula left its domain of validity (denominator <= 0).
struct BoundOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Certification-mode preconditions on the system matrices do not hold.
struct ConditionViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ecr
