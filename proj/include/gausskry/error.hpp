#pragma once

#include <stdexcept>

namespace gausskry {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A pivot vanished to working precision. For the generators handled here the
// matrices are provably nonsingular, so this signals a contract violation.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class PoleHit : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class ToleranceNotAchievable : public Error {
 public:
  using Error::Error;
};

}  // namespace gausskry
