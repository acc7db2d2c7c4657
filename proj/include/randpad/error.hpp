#pragma once

#include <stdexcept>
#include <string>

namespace randpad {

/// Bad shapes, out-of-range arguments, inconsistent model configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input files: IDX, CIFAR batches, checkpoints.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Unknown or malformed run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace randpad
