#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested grid would not resolve the dynamics; the message names the
/// violated bound.
class UnstableGridError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An estimator was asked to work on data that cannot support it
/// (no trials, no clicks, a non-invertible efficiency).
class DataInsufficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qmem
