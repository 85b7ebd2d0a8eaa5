#pragma once

#include <stdexcept>
#include <string>

namespace aot {

// Bad input data (files, manifests, references). The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An optimization ran out of its iteration budget. The CLI maps this to exit code 3.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace aot
