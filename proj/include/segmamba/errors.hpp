#pragma once

#include <stdexcept>
#include <string>

namespace segmamba {

/// Incompatible tensor extents, bad axis/order arguments, malformed specs.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value outside the domain of an operation (log of a non-positive value,
/// non-positive scan step, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an operation's scratch requirement exceeds the caller's budget.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing, extra or mis-shaped parameters.
class ParamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system and format problems.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric that has no value for the given input (e.g. HD95 of an empty mask).
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace segmamba
