#pragma once

#include <stdexcept>
#include <string>

namespace eqctsp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (names the offending field in the message).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Problem size outside the supported range of an algorithm.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// Action/observable request inconsistent with the current state.
class InvalidActionError : public Error {
 public:
  using Error::Error;
};

}  // namespace eqctsp
