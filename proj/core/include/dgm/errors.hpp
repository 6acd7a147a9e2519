#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL text. `position()` is a 0-based byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A derivative tag left the supported order caps.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// Pointwise evaluation hit a domain error (log of non-positive, division by zero, ...).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid network layout / spec.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; `key()` names the offending config key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Non-finite loss or overflow during training.
class NumericError : public Error {
 public:
  NumericError(std::size_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Problem shape not covered by the finite-difference oracles.
class UnsupportedShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgm
