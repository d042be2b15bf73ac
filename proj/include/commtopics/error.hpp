#pragma once

#include <stdexcept>
#include <string>

namespace commtopics {

// Exit-code classes used by the command line front end.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

class ArgumentError : public Error {
 public:
  ArgumentError(std::string stage, const std::string& message)
      : Error(ErrorKind::usage, std::move(stage), message) {}
};

class DataError : public Error {
 public:
  DataError(std::string stage, const std::string& message)
      : Error(ErrorKind::data, std::move(stage), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string stage, const std::string& message)
      : Error(ErrorKind::numerical, std::move(stage), message) {}
};

}  // namespace commtopics
