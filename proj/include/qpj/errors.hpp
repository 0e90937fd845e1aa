#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qpj {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A step matrix needed a division by b (or b~) at a near-zero value.
class SingularStepError : public Error {
 public:
  SingularStepError(std::size_t step, double modulus)
      : Error("singular step at j=" + std::to_string(step) +
              " (|b|=" + std::to_string(modulus) + ")"),
        step_(step),
        modulus_(modulus) {}
  std::size_t step() const noexcept { return step_; }
  double modulus() const noexcept { return modulus_; }

 private:
  std::size_t step_;
  double modulus_;
};

class DegenerateFunctionError : public Error {
 public:
  using Error::Error;
};

class CompositionError : public Error {
 public:
  using Error::Error;
};

class UnreliableEstimateError : public Error {
 public:
  UnreliableEstimateError(double excluded_fraction)
      : Error("excluded fraction " + std::to_string(excluded_fraction) +
              " exceeds 0.1"),
        excluded_fraction_(excluded_fraction) {}
  double excluded_fraction() const noexcept { return excluded_fraction_; }

 private:
  double excluded_fraction_;
};

class ZeroOnContourError : public Error {
 public:
  using Error::Error;
};

class RationalError : public Error {
 public:
  explicit RationalError(std::int64_t denominator)
      : Error("omega is rational to double precision, denominator " +
              std::to_string(denominator)),
        denominator_(denominator) {}
  std::int64_t denominator() const noexcept { return denominator_; }

 private:
  std::int64_t denominator_;
};

class PrecisionExhaustedError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

// Configuration validation failure; field() is the dotted path at fault.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace qpj
