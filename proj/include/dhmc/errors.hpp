#pragma once

#include <stdexcept>
#include <string>

namespace dhmc {

// Caller broke a documented precondition (shape mismatch, bad index, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The user-supplied model misbehaved, e.g. returned NaN.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value fell outside the support of an embedding or model.
class OutOfSupport : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// An integrator was handed a target it has no algorithm for.
class UnsupportedTarget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A statistic is undefined for the data it was given (zero variance, no updates).
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Configuration could not be parsed or failed validation. `field` names the
// offending key so the CLI can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)), detail_(what) {}
  const std::string& field() const noexcept { return field_; }
  // Message without the field prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string field_;
  std::string detail_;
};

// Dataset or run-directory content is missing or malformed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dhmc
