#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmsovc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a structural invariant (arity, domain membership, tree shape, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `position` is a byte offset into the parsed text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A brute-force enumeration or construction would exceed its configured cap.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace cmsovc
