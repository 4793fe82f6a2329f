#pragma once

#include <stdexcept>
#include <string>

namespace mfc {

/// Argument outside the mathematical domain of an operation (q outside J,
/// a non-positive Legendre value where a positive one is required, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration / model parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request would exceed the memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The weight model contradicts a structural property every cascade has
/// (for instance the spectrum gap is not positive on (0,1)).
class ModelInconsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mfc
