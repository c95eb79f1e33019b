#pragma once

#include <stdexcept>
#include <string>

namespace credence {

// Malformed or unusable input data (CSV problems, empty treatment arms).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration values or CLI usage.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Divergence, non-convergence, singular systems.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace credence
