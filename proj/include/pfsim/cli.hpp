// Command-line driver: run, compare, sweep, list.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfsim {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,     // filesystem and other unexpected errors
    kExitUsage = 2,
    kExitValidation = 3,  // bad scenario document or field value
    kExitNumeric = 4,     // simulation went non-finite
    kExitAssertion = 5,   // --assert-trends or --fail-on-collision tripped
};

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `key=v1,v2,...` specs into assignment lists, first key slowest.
/// Commas inside brackets do not split values.
std::vector<std::vector<std::string>> expand_grid(const std::vector<std::string>& specs);

}  // namespace pfsim
