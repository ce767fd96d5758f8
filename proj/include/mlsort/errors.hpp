#pragma once

#include <stdexcept>
#include <string>

namespace mlsort {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad rank, unsorted input, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Internal consistency was violated, e.g. two elements share one identity.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// A message was addressed to a PE outside the sender's group.
class AddressingError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTopology : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlsort
