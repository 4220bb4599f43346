#pragma once

#include <stdexcept>
#include <string>

namespace spinfer {

// Three error families, mapped to CLI exit codes 2/3/4.

// bad input: dimension mismatch, out-of-range parameter, malformed file
struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// method cannot run on this instance (enumeration too large, block budget, ...)
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// numerical failure: no convergence, invariant violation, non-differentiable point
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinfer
