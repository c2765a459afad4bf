#pragma once

#include <stdexcept>
#include <string>

namespace sepolml {

/// Base class for recoverable data errors raised by the library.
/// The CLI maps these to exit code 2; std::logic_error maps to 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Invalid configuration or usage; the CLI maps this to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  ZeroVectorError() : Error("cosine similarity of a zero vector is undefined") {}
};

class DegenerateCorpusError : public Error {
 public:
  DegenerateCorpusError() : Error("walk corpus contains no training pairs") {}
};

class MissingNodeError : public Error {
 public:
  explicit MissingNodeError(const std::string& key)
      : Error("no embedding for node '" + key + "'"), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class LabelTooSmallError : public Error {
 public:
  LabelTooSmallError(int label, std::size_t count)
      : Error("label " + std::to_string(label) + " has only " + std::to_string(count) +
              " example(s); need at least 2 to split") {}
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(std::size_t expected, std::size_t got)
      : Error("feature dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class NonFiniteLossError : public Error {
 public:
  explicit NonFiniteLossError(const std::string& diagnostic)
      : Error("training loss became non-finite: " + diagnostic) {}
};

class PoolExhaustedError : public Error {
 public:
  explicit PoolExhaustedError(const std::string& pool)
      : Error("name pool '" + pool + "' cannot supply a fresh name") {}
};

}  // namespace sepolml
