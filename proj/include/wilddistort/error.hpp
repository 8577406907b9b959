#pragma once

#include <stdexcept>
#include <string>

namespace wilddistort {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Image too small for a transform (e.g. crop window larger than the image).
class SizingError : public Error {
 public:
  using Error::Error;
};

/// Unknown distortion kind, out-of-range level, malformed parameter record.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Bad scheme, severity table, run configuration or listing.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class CodecError : public Error {
 public:
  using Error::Error;
};

/// Invalid probability distribution or vector shape passed to a loss.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A manifest record or plan violating its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace wilddistort
