#pragma once

#include <stdexcept>
#include <string>

namespace rpce {

/// Input outside a marginal's support, or a probability outside (0,1).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Matrix/vector dimensions that do not agree.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (fold count, dimension, degree cap, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A count that does not fit the platform size type.
class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// A statistic that is undefined for the given data (zero variance).
class UndefinedMetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No admissible surrogate could be produced.
class BuildError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized payload (JSON or CSV).
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Serialized payload written by an incompatible schema version.
class VersionError : public FormatError {
public:
  using FormatError::FormatError;
};

/// Truss geometry that yields a mechanism (singular stiffness).
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpce
