#pragma once

#include <stdexcept>
#include <string>

namespace sdv {

/// Problems with input data: unreadable files, malformed rows, incompatible shapes of
/// user-supplied artifacts. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric breakdown during computation (NaN/Inf activations, diverged gradients).
/// Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sdv
