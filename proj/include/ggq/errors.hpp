#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ggq {

/// The behavior chain does not have a unique stationary distribution.
class DegenerateChainError : public std::runtime_error {
 public:
  DegenerateChainError(const std::string& what, std::vector<std::size_t> states)
      : std::runtime_error(what), unreachable_(std::move(states)) {}

  const std::vector<std::size_t>& unreachable_states() const noexcept { return unreachable_; }

 private:
  std::vector<std::size_t> unreachable_;
};

/// The feature covariance is (numerically) singular.
class AssumptionViolated : public std::runtime_error {
 public:
  AssumptionViolated(const std::string& what, double lambda)
      : std::runtime_error(what), lambda_(lambda) {}

  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// Malformed configuration, CSV or JSON input. The message carries the key path.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ggq
