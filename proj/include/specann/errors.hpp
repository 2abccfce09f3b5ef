#pragma once

#include <stdexcept>
#include <string>

namespace specann {

/// Base class for every numerical failure raised by the library.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A real-axis evaluation was requested at a point of the support.
class BoundaryEvaluationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Leaf refinement would need more levels than the configured maximum.
class PrecisionError : public NumericError {
public:
    PrecisionError(const std::string& what, int required_depth)
        : NumericError(what), required_depth_(required_depth) {}
    int required_depth() const noexcept { return required_depth_; }

private:
    int required_depth_;
};

/// I - iM numerically singular where it cannot be in exact arithmetic.
class SingularEvaluationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// A construction's hypothesis does not hold for the supplied input.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scenario configuration failed validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace specann
