#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sysrel {

// Domain and argument violations use std::domain_error / std::invalid_argument
// directly. The types below cover failure modes specific to this library.

/// Correlation matrix could not be factorized even with the largest nugget.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called on an object that is not ready for it.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed composition or limit-state expression.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::invalid_argument(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Variance of the composition at a point is numerically zero; Sobol' routing is undefined.
class DegenerateVarianceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No limit state can be selected (all total indices vanish).
class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A limit state or surrogate produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sysrel
