#pragma once

#include <stdexcept>
#include <string>

namespace svgen {

// Bad or inconsistent input data (shapes, files, formats).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values or failed numerical checks.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace svgen
