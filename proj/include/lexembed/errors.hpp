#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexembed {

// Base of every error thrown by the library. The CLI maps the concrete
// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// A script that cannot be fed to a model (e.g. shorter than the window).
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters during a training run.
class TrainingError : public NumericError {
 public:
  TrainingError(const std::string& what, int epoch, std::size_t batch)
      : NumericError(what + " (epoch " + std::to_string(epoch) + ", batch " +
                     std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}

  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

// A correlation or ranking metric that has no defined value on its input.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed file content; line is 1-based, 0 when not line-oriented.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint and data that cannot be used together.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexembed
