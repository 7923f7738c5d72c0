// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace misocap {

// Bad caller input: dimension mismatch, non-finite values, malformed flags.
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A numeric contract broke mid-computation (non-real quadratic form,
// eigensolver stall, closed-form cross-check mismatch).
struct NumericalIntegrityError : std::runtime_error {
    explicit NumericalIntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace misocap
