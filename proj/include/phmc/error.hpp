#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phmc {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must share a truncation dimension do not.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t got)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

/// Invalid argument or configuration value. `field` is a dotted path when the
/// value came from a config document ("kernel.dt").
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The integrator produced a non-finite or runaway state.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& message)
      : Error("integration diverged at step " + std::to_string(step) + ": " + message),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A quantitative precondition (an inequality between two computed sides) failed.
class ConditionError : public Error {
 public:
  ConditionError(std::string condition, double lhs, double rhs)
      : Error("condition " + condition + " violated: lhs=" + std::to_string(lhs) +
              " > rhs=" + std::to_string(rhs)),
        condition_(std::move(condition)),
        lhs_(lhs),
        rhs_(rhs) {}

  const std::string& condition() const noexcept { return condition_; }
  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  std::string condition_;
  double lhs_;
  double rhs_;
};

}  // namespace phmc
