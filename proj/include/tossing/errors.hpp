#pragma once

#include <stdexcept>
#include <string>

namespace tossing {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad argument values: negative distances, non-finite states, empty inputs.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class PreconditionViolation : public Error {
public:
  using Error::Error;
};

// A slot whose surroundings do not form one of the twelve contact patterns,
// e.g. a cell of a one-wide grid walled on both long sides and an end.
class GeometryError : public Error {
public:
  using Error::Error;
};

class NoSlotError : public Error {
public:
  using Error::Error;
};

class CoverageError : public Error {
public:
  using Error::Error;
};

class MissingPatternError : public Error {
public:
  using Error::Error;
};

class NoMatchError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(std::string source, int line, const std::string& message)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

private:
  std::string source_;
  int line_;
};

}  // namespace tossing
