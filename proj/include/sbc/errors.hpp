#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sbc {

// Invalid user-supplied configuration (bad key, bad value, broken invariant).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An actuation/observation point makes one or more modes invisible
// (sin(k*beta) below the degeneracy threshold).
struct DegenerateModeError : std::runtime_error {
    std::vector<int> modes;
    DegenerateModeError(const std::string& what, std::vector<int> flagged)
        : std::runtime_error(what), modes(std::move(flagged)) {}
};

// Numerical failure: singular Gramian, defective mode system, quadrature
// non-convergence, integrator stability guard.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sbc
