#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace g2sim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration. Carries one message per violated
/// invariant, each prefixed with the offending field name.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  explicit ConfigError(std::string violation)
      : ConfigError(std::vector<std::string>{std::move(violation)}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A formula evaluated outside its domain (zero power, zero efficiency, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Not enough counts to form an estimate.
class StatisticsError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace g2sim
