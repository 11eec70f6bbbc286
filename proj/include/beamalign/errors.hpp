#pragma once

#include <stdexcept>
#include <string>

namespace beamalign {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or invalid arguments supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The traced ray cannot reach a component (parallel to its plane or behind it).
class BeamMissError : public Error {
 public:
  using Error::Error;
};

class LimitViolation : public Error {
 public:
  LimitViolation(const std::string& axis, double value, double limit);
  const std::string& axis() const { return axis_; }

 private:
  std::string axis_;
};

// Beam landed outside the Aperture-1 camera's field of view.
class FieldOfViewError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

class UndefinedRSquared : public Error {
 public:
  UndefinedRSquared(int axis);
  int axis() const { return axis_; }

 private:
  int axis_;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// A Step-2 sample came back without an Aperture-2 reading.
class BlockedSampleError : public Error {
 public:
  using Error::Error;
};

class GainEstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace beamalign
