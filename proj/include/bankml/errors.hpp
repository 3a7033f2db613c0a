#pragma once

#include <stdexcept>

namespace bankml {

// Malformed or degenerate input data: bad CSV cells, schema mismatches,
// single-class datasets, and so on.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration: unknown names, out-of-range settings.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An optimizer failed to reach a usable solution.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bankml
