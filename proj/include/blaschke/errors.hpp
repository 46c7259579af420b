#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace blaschke {

/// Precondition violated by the caller (point outside the disk, bad index, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to produce a result within tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RootPolishError : public NumericalError {
 public:
  RootPolishError(const std::string& what, std::complex<double> root, double residual)
      : NumericalError(what), root_(root), residual_(residual) {}

  std::complex<double> root() const { return root_; }
  double residual() const { return residual_; }

 private:
  std::complex<double> root_;
  double residual_;
};

/// Explicit coefficient form requested beyond the configured degree cap.
class CapExceededError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A detection procedure could not decide at the requested resolution.
class InconclusiveError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace blaschke
