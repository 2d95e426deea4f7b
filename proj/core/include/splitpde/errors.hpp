#pragma once

#include <stdexcept>
#include <string>

namespace splitpde {

/// Invalid build-time parameters (degree out of range, degenerate domain, bad config file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid runtime data (non-finite samples, layout mismatches, bad indices).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative solver failed to reach its tolerance; carries the residual it achieved.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double achieved_residual)
        : std::runtime_error(msg), residual(achieved_residual) {}

    double residual;
};

}  // namespace splitpde
