#pragma once

#include <stdexcept>
#include <string>

namespace portwatch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input record (bad syntax or wrong field type).
struct ParseError : Error {
  using Error::Error;
};

/// Structurally valid input that violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// Window statistics requested over an empty child list.
struct EmptyWindowError : Error {
  using Error::Error;
};

/// Rollup discipline violation: mixed series, oversized window, or a
/// scale fed from anything but its declared parent.
struct LadderError : Error {
  using Error::Error;
};

/// Operation applied to a (port, direction, scale) it does not belong to,
/// or a node missing from a structure that must contain it.
struct IdentityError : Error {
  using Error::Error;
};

/// x_max == x_min: the normalization factor 1/|x_max - x_min| is undefined.
struct FlatSeriesError : Error {
  using Error::Error;
};

/// Baseline has not yet accumulated the minimum history to emit regions.
struct ColdStartError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct TimeRangeError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace portwatch
