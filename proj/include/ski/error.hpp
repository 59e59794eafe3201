#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ski {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

class NotARedex : public Error {
 public:
  using Error::Error;
};

class NotClosed : public Error {
 public:
  using Error::Error;
};

// The composed denotation is empty: the antecedent cannot be met by any
// member of the argument's denotation.
class UnificationFailure : public Error {
 public:
  using Error::Error;
};

// A set-equation shape the template calculus does not solve.
class UnsupportedShape : public Error {
 public:
  using Error::Error;
};

class IncompleteBinding : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Neither companion case applies to a match of a B0-based member.
class NoCaseApplies : public Error {
 public:
  using Error::Error;
};

}  // namespace ski
