#pragma once

#include <stdexcept>
#include <string>

namespace liber {

/// Argument outside the analytic domain (e.g. |z| >= 1 for a disc transform).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Evaluation at (or numerically indistinguishable from) a pole.
struct PoleError : std::domain_error {
  explicit PoleError(const std::string& what) : std::domain_error(what) {}
};

/// Square-root / quadratic-root branch could not be resolved.
struct BranchError : std::runtime_error {
  explicit BranchError(const std::string& what) : std::runtime_error(what) {}
};

/// Point left the region where a formula or flow is valid.
struct OutOfDomainError : std::runtime_error {
  explicit OutOfDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative scheme (stepper, Newton, bisection) did not converge.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace liber
