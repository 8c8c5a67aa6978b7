#pragma once

#include <stdexcept>
#include <string>

namespace caps {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files: maps, policy files, checkpoints, metric CSVs.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A call that violates an operation's precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace caps
