#pragma once

#include <stdexcept>
#include <string>

namespace cnsf {

/// Violated precondition or malformed input. CLI maps this to exit code 1.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// Solver breakdown, non-convergence, NaN propagation. CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cnsf
