#pragma once

#include <stdexcept>
#include <string>

namespace rush {

// Base of every error raised by the library. Callers that only care about
// "something went wrong in rush" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnknownArm : public Error {
 public:
  using Error::Error;
};

// Requested pulls past the tabulated horizon of an arm.
class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

// An active arm has no observation in the current rung.
class MissingLoss : public Error {
 public:
  using Error::Error;
};

// The first rung would allocate zero pulls per arm.
class BudgetTooSmall : public Error {
 public:
  using Error::Error;
};

class TiedBestArm : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class LossOutOfRange : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class SpecMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace rush
