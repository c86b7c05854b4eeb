#pragma once

#include <stdexcept>

namespace fisheyegt {

// Argument outside the mathematical domain of an operation (non-unit
// direction, non-positive depth, field of view outside (0, 180), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A pixel or direction that the lens model does not cover.
class OutOfCoverage : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed or truncated file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, detected before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fisheyegt
