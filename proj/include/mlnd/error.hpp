#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlnd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `offset` is a byte offset into the parsed text
/// (or a 1-based line number for line-oriented formats, see `line`).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t line = 0)
      : Error(what), offset_(offset), line_(line) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t offset_;
  std::size_t line_;
};

/// A precondition of an operation was violated by its input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configured resource limit (enumeration size, node budget) was exceeded.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

/// Something that the construction guarantees cannot happen did happen.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

}  // namespace mlnd
