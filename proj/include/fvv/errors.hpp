#pragma once

#include <stdexcept>
#include <string>

namespace fvv {

// Violated precondition / malformed argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural constraint violated (budget exceeded, uncovered peers, ...).
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance exceeds the bounds of an exhaustive routine.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coalition protocol misuse (non-adjacent merge, duplicate peer, ...).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No feasible solution exists for the requested instance.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed config / trace / game-file input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fvv
