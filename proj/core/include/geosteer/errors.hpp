#pragma once

#include <stdexcept>
#include <string>

namespace geosteer {

// Base for everything the library throws on bad input or numerical failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wrong vector/matrix dimension.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite input or output.
class NumericError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

// Raised when a truncated SVD finds nothing to keep (ensemble collapse).
class RankError : public Error {
 public:
  using Error::Error;
};

// Convergence diagnostics that cannot be evaluated (e.g. zero within-chain variance).
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

}  // namespace geosteer
