#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfldp {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible spaces, or a dimension an operation does not support (d > 1 metrics).
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotImplemented : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double last_residual);

  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  std::size_t iterations_;
  double last_residual_;
};

// A Markov chain produced a non-finite position; usually the step size is too large.
class DivergedChain : public Error {
 public:
  explicit DivergedChain(std::size_t step);

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message);

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfldp
