#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An admissibility inequality on (N, alpha, beta, lambda) failed.
class ConstraintViolation : public Error {
 public:
  ConstraintViolation(std::string constraint, const std::string& detail)
      : Error(constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InterpolationError : public Error {
 public:
  using Error::Error;
};

/// Delta K(0) or Delta K~(0) vanishes.
class DegenerateCoefficient : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// The reduced function has no isolated critical point in the window.
class NoCriticalPoint : public Error {
 public:
  using Error::Error;
};

/// A Newton iterate crossed zero.
class PositivityLoss : public Error {
 public:
  PositivityLoss(const std::string& what, double s_location)
      : Error(what), s_location_(s_location) {}
  double s_location() const noexcept { return s_location_; }

 private:
  double s_location_;
};

}  // namespace ckn
