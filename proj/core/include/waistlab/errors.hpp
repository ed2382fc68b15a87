#pragma once

#include <stdexcept>
#include <string>

namespace waistlab {

/// Violated operation precondition (bad caller input).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure at run time (non-convergence, unavailable estimator, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace waistlab
