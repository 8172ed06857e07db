#pragma once

#include <stdexcept>
#include <string>

namespace greedynet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong shapes, invalid configuration, malformed files.
/// The command-line tool maps these to exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A numerically impossible request (singular systems, degenerate supports).
/// The command-line tool maps these to exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NotPositiveDefinite : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class RankDeficientSupport : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class AllZeroInput : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ZeroAtom : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TapeMissing : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class EmptyBatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnknownMethod : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ImageTooSmall : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnsupportedFormat : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class CorruptHeader : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IoError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Throws ShapeMismatch with a "<what>: expected A, got B" message.
[[noreturn]] void throw_shape(const std::string& what, long expected, long got);

} // namespace greedynet
