#pragma once

#include <stdexcept>
#include <string>

namespace rml {

// Error classes map onto the CLI exit codes: config 2, numerical 3, io 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateMetricError : NumericalError {
    explicit DegenerateMetricError(const std::string& what) : NumericalError(what) {}
};

struct StabilityError : NumericalError {
    explicit StabilityError(const std::string& what) : NumericalError(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rml
