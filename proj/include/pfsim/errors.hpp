#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfsim {

/// Non-finite or out-of-domain argument passed to a math routine.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Pitch too close to +/-pi/2 for the Euler parameterization.
class GimbalLockError : public std::domain_error {
public:
    explicit GimbalLockError(double pitch);
    double pitch() const noexcept { return pitch_; }

private:
    double pitch_;
};

/// A loaded or constructed value violates a field constraint.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& constraint);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed scenario text.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// Message without the position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
};

/// Simulation produced a non-finite state; `record_index` is the first bad step.
class NumericAbort : public std::runtime_error {
public:
    NumericAbort(std::size_t record_index, const std::string& what);
    std::size_t record_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Filesystem failure, with the offending path in the message.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pfsim
