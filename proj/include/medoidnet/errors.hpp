#pragma once

#include <stdexcept>
#include <string>

namespace medoidnet {

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation needs a capability the space does not provide
/// (enumeration, epsilon-net oracle, anchor, ...).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An element is not representable in the space it was handed to.
class InvalidElement : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input files (datasets, models, configs, loss matrices).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace medoidnet
