// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpcmpi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by bad input (malformed files, violated preconditions).
/// The CLI maps these to exit code 1; everything else is a runtime failure.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : ValidationError("parse error at line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InvariantViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyMask : public ValidationError {
 public:
  EmptyMask() : ValidationError("mask selects no pixels") {}
};

class SingularView : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A point evaluated outside the RPC validity volume.
class DenominatorNearZero : public Error {
 public:
  explicit DenominatorNearZero(std::size_t index)
      : Error("RPC denominator near zero at point " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t index, double residual)
      : Error("localization did not converge at point " + std::to_string(index) +
              " (residual " + std::to_string(residual) + ")"),
        index_(index),
        residual_(residual) {}
  std::size_t index() const { return index_; }
  double residual() const { return residual_; }

 private:
  std::size_t index_;
  double residual_;
};

class Divergence : public Error {
 public:
  using Error::Error;
};

class EmptyOutput : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpcmpi
