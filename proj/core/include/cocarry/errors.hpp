#pragma once

#include <stdexcept>
#include <string>

namespace cocarry {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an input file cannot be parsed; carries the offending line.
struct ParseError : Error {
  ParseError(const std::string& what, int line_number)
      : Error(what + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
  int line;
};

/// Segment lengths in a frame are outside the plausible human band.
struct UnitSanityError : Error {
  using Error::Error;
};

/// Frame failed the segment-length sanity check against the calibrated geometry.
struct InfeasibleFrame : Error {
  using Error::Error;
};

/// J J^T is numerically singular beyond what regularization can absorb.
struct DegenerateJacobian : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Posture optimization could not be started from an infeasible initial point.
struct InfeasibleStart : Error {
  using Error::Error;
};

}  // namespace cocarry
