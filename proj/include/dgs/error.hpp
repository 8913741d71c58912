#pragma once

#include <stdexcept>
#include <string>

namespace dgs {

/// Bad configuration or unusable CLI arguments. Maps to process exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed, missing, or inconsistent input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Serialization or filesystem failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values encountered while training or scoring. Maps to exit code 2.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dgs
