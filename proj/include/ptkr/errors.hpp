#pragma once

#include <stdexcept>
#include <string>

namespace ptkr {

/// Invalid user-supplied value. `field()` names the offending parameter.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Asymptotic formula used outside the regime where it holds.
class OutOfRegimeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Caller broke a precondition (e.g. stepping an already diverged point).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Fit requested over a window that is empty, degenerate, or crosses a transition.
class FitWindowError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Floating point range exhausted (overflowing kick factor, failed eigensolve).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ptkr
