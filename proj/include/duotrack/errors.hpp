#pragma once

#include <stdexcept>
#include <string>

namespace duotrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents or channel counts do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown config key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content (groundtruth, trace, image, weights).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Zero-area or collinear regions where a proper region is required.
class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

}  // namespace duotrack
