#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drauc {

/// Invalid architecture, hyperparameter or argument combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector length does not match the expected dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value lies outside its admissible domain (p_hat, a, b, alpha, lambda ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data lacks something the operation needs (a class, enough rows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV or checkpoint text that cannot be parsed. Carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid or incompatible checkpoint. Carries the offending field.
class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace drauc
