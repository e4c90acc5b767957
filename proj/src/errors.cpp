#include "pfsim/errors.hpp"

#include <string>
#include <utility>

namespace pfsim {

GimbalLockError::GimbalLockError(double pitch)
    : std::domain_error("gimbal lock: pitch " + std::to_string(pitch) +
                        " rad is within the singular band of +/-pi/2"),
      pitch_(pitch) {}

ValidationError::ValidationError(std::string field, const std::string& constraint)
    : std::runtime_error(field + ": " + constraint), field_(std::move(field)) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      detail_(what),
      line_(line),
      column_(column) {}

NumericAbort::NumericAbort(std::size_t record_index, const std::string& what)
    : std::runtime_error(what + " (record " + std::to_string(record_index) + ")"),
      index_(record_index) {}

}  // namespace pfsim
