#pragma once

#include <stdexcept>
#include <string>

namespace turreteval {

// Input/config problems: bad files, out-of-range fields, mismatched ids.
// CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: diverging loops, missing crossover, infeasible design.
// CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace turreteval
