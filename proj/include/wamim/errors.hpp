#pragma once

#include <stdexcept>
#include <string>

namespace wamim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or divisibility violation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable input values.
class InputError : public Error {
 public:
  using Error::Error;
};

// Internally inconsistent pyramid, target set, or parameter layout.
class StructureError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mask or loss with nothing to measure.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class GradientError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (container, netpbm, checkpoint manifest).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wamim
