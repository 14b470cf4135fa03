#pragma once

#include <stdexcept>
#include <string>

namespace parapsi {

// Invalid or inconsistent caller input (bad JSON, misaligned grids, out-of-range
// parameters). Always a caller bug, never a numerical condition.
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// The request is well-formed but outside what this implementation supports
// (dimension > 2, derivative order beyond the symbol's analytic table, ...).
struct capability_error : std::runtime_error {
    explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

// Mathematically undefined point (singular derivative at xi = 0, weight outside
// its admissible exponent range).
struct domain_error : std::domain_error {
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

}  // namespace parapsi
