#pragma once

#include <stdexcept>
#include <string>

namespace nhg {

/// Invalid group data, shapes or indices.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The requested quantity is undefined on the branch the point falls in.
struct BranchError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Adaptive quadrature did not reach its tolerance within the panel budget.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value is too small to take logarithms or ratios of reliably.
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The function object lacks an evaluator the operation needs.
struct CapabilityError : std::logic_error {
  using std::logic_error::logic_error;
};

/// A quadrature grid cannot resolve the integrand at the requested scale.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every sample of a sweep was excluded.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration or command line.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace nhg
