#pragma once

#include <stdexcept>
#include <string>

namespace rnnbelief {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidActionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a belief update meets an observation with zero total likelihood.
class ImpossibleObservationError : public Error {
 public:
  using Error::Error;
};

class DegenerateParticlesError : public Error {
 public:
  using Error::Error;
};

class UndefinedHorizonError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Configuration problems carry the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace rnnbelief
