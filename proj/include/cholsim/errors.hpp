#pragma once

#include <stdexcept>
#include <string>

namespace cholsim {

// Base class for all library errors so callers can catch the whole family.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A config value violates a documented invariant.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// A phantom pull was requested with no grasp established.
class NoGrasp : public Error {
 public:
  using Error::Error;
};

// A single pull step exceeded the configured limit.
class PullExceedsLimit : public Error {
 public:
  using Error::Error;
};

// Two grids that must share a shape do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A mask (or its largest component) is below the usable area floor.
class MaskTooSmall : public Error {
 public:
  using Error::Error;
};

// No gallbladder pixel borders liver or liver-bed: either the dissection is
// complete or segmentation failed; callers distinguish via attachment state.
class EmptyBoundary : public Error {
 public:
  using Error::Error;
};

// Point set has rank < 2 within tolerance; no stable axes exist.
class DegeneratePointSet : public Error {
 public:
  using Error::Error;
};

// An operation received an empty input it cannot default.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

// Fewer samples than the estimator needs.
class TooFewPoints : public Error {
 public:
  using Error::Error;
};

// Scenario/config file failed to parse or validate.
class ConfigParseError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cholsim
