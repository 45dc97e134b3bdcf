#pragma once

#include <stdexcept>
#include <string>

namespace fitzcert {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Vector length does not match the space dimension.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Point is outside the effective domain of an operator.
class DomainError : public Error {
public:
  using Error::Error;
};

// Malformed input: bad exponent, non-finite entries, unsupported operator combination.
class ValidationError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

} // namespace fitzcert
