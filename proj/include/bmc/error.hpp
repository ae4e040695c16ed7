#pragma once

#include <stdexcept>
#include <string>

namespace bmc {

// Base of every error thrown by the library. The CLI maps ConfigError to
// exit code 2 and everything else to a failed task verdict.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

class MeshError : public Error {
 public:
  using Error::Error;
};
class TopologyError : public Error {
 public:
  using Error::Error;
};
class UnreachableError : public Error {
 public:
  using Error::Error;
};
class ChartError : public Error {
 public:
  using Error::Error;
};
class HypothesisError : public Error {
 public:
  using Error::Error;
};
class InapplicableError : public Error {
 public:
  using Error::Error;
};
class UnsupportedError : public Error {
 public:
  using Error::Error;
};
class DegeneracyError : public Error {
 public:
  using Error::Error;
};
class ConformalityError : public Error {
 public:
  using Error::Error;
};

class LiftDomainError : public Error {
 public:
  LiftDomainError(int square, const std::string& what)
      : Error("square " + std::to_string(square) + ": " + what), square_(square) {}
  int square() const { return square_; }

 private:
  int square_;
};

class NumericalLiftError : public Error {
 public:
  using Error::Error;
};

}  // namespace bmc
