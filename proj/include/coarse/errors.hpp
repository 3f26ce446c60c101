#ifndef COARSE_ERRORS_HPP
#define COARSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coarse {

/// Base class for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input data violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A probability table does not sum to one exactly.
class NormalizationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// cond(x, U) > 0 with x not a member of U.
class MembershipError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyObservation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Conditioning on an observation with zero probability of being observed.
class ZeroObservation : public Error {
 public:
  using Error::Error;
};

// Conditioning on an event with zero probability of occurring.
class ZeroEvent : public Error {
 public:
  using Error::Error;
};

// Conditional queried at a state with zero marginal probability.
class ZeroMarginal : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NotCar : public Error {
 public:
  using Error::Error;
};

class NotCcar : public Error {
 public:
  using Error::Error;
};

class NotHonest : public Error {
 public:
  using Error::Error;
};

class UnbiasednessViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonterminatingSpec : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySupport : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A configured resource cap was hit; the verdict is "undecided", not "false".
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Two routes that a theorem proves equivalent disagreed; an implementation bug.
class InternalInconsistency : public std::logic_error {
 public:
  explicit InternalInconsistency(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace coarse

#endif
