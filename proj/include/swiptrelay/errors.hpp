#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace swiptrelay {

// Argument outside the mathematical domain of an operation (negative energy,
// PS ratio outside [0,1], ...). Invalid sizes and counts use
// std::invalid_argument instead.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Action violates 0 <= u and 0 <= E_T for the state it is applied to.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Policy evaluation system is singular or ill-conditioned, which for this
// model means the decision rule induces more than one recurrent class.
class MultichainError : public std::runtime_error {
 public:
  MultichainError(const std::string& what, std::vector<std::size_t> rule)
      : std::runtime_error(what), rule_(std::move(rule)) {}

  const std::vector<std::size_t>& rule() const noexcept { return rule_; }

 private:
  std::vector<std::size_t> rule_;
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulated policy returned an infeasible action.
class PolicyViolationError : public std::runtime_error {
 public:
  PolicyViolationError(const std::string& what, std::size_t block)
      : std::runtime_error(what), block_(block) {}

  std::size_t block() const noexcept { return block_; }

 private:
  std::size_t block_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swiptrelay
