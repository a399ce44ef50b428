#pragma once

#include <stdexcept>
#include <string>

namespace slowfast {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepCapExceeded : NumericError {
    using NumericError::NumericError;
};

struct NonFiniteState : NumericError {
    using NumericError::NumericError;
};

struct OutOfRange : NumericError {
    using NumericError::NumericError;
};

struct DomainError : NumericError {
    using NumericError::NumericError;
};

struct DimensionMismatch : NumericError {
    using NumericError::NumericError;
};

struct UnsupportedModel : NumericError {
    using NumericError::NumericError;
};

struct NotAnEquilibrium : NumericError {
    using NumericError::NumericError;
};

struct NotASaddle : NumericError {
    using NumericError::NumericError;
};

struct RangeNotCovered : NumericError {
    using NumericError::NumericError;
};

struct UnsortedInput : NumericError {
    using NumericError::NumericError;
};

struct TooFewPoints : NumericError {
    using NumericError::NumericError;
};

struct SingularIntegrand : NumericError {
    using NumericError::NumericError;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownPreset : UsageError {
    using UsageError::UsageError;
};

struct SchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace slowfast
