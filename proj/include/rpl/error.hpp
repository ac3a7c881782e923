#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rpl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (e.g. Phi^{-1}(p)
// with p outside (0,1), p-means below the admissible exponent).
class DomainError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A Minkowski combination or sup-convolution left the output grid box.
class BoundsError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A theorem hypothesis failed on the grid. The witness names the offending
// cell, cell pair, or weight so the failure is reproducible.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::string witness)
      : Error(what + " [witness: " + witness + "]"), witness_(std::move(witness)) {}

  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

}  // namespace rpl
