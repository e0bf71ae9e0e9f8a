#pragma once

#include <stdexcept>
#include <string>

namespace esc {

// Base for every error raised by the library. Subclasses map onto the
// failure categories callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions disagree (matrix shapes, layer widths, cache/param pairs).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or construction arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value lies outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Optimizer refused a step (non-finite gradients).
class OptimizerError : public Error {
 public:
  OptimizerError(const std::string& what, std::size_t layer)
      : Error(what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace esc
