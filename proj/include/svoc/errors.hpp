#ifndef SVOC_ERRORS_HPP_
#define SVOC_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svoc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression text. `position` is a 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error("syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A problem definition that violates its schema or invariants.
class ProblemError : public Error {
 public:
  using Error::Error;
};

// Blow-up, singular linear step, or iteration that failed to converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& message, long index = -1)
      : Error(index >= 0 ? message + " (index " + std::to_string(index) + ")" : message),
        index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace svoc

#endif  // SVOC_ERRORS_HPP_
