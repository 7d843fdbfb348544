#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bosonstar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
  using Error::Error;
};

class NonFiniteSymbol : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class BlowupDetected : public Error {
 public:
  explicit BlowupDetected(double t)
      : Error("blow-up proxy exceeded at t=" + std::to_string(t)), time(t) {}
  double time;
};

/// Fixed-point iteration stopped contracting.
class NoContraction : public Error {
 public:
  NoContraction(std::string what, std::vector<double> ratios)
      : Error(std::move(what)), ratios(std::move(ratios)) {}
  std::vector<double> ratios;
};

class TailNotDecaying : public Error {
 public:
  using Error::Error;
};

class OverflowRisk : public Error {
 public:
  using Error::Error;
};

class EmptyBand : public Error {
 public:
  using Error::Error;
};

class WrapAround : public Error {
 public:
  using Error::Error;
};

class SupportLeak : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected; `fields` carries one message per offending field.
class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(std::vector<std::string> fields)
      : Error(join(fields)), fields(std::move(fields)) {}
  std::vector<std::string> fields;

 private:
  static std::string join(const std::vector<std::string>& f) {
    std::string out = "invalid configuration:";
    for (const auto& s : f) out += "\n  " + s;
    return out;
  }
};

}  // namespace bosonstar
