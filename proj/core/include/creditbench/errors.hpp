#pragma once

#include <stdexcept>
#include <string>

namespace creditbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, schema violations, degenerate class layouts.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace creditbench
