#pragma once

#include <stdexcept>
#include <string>

namespace adexsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A parameter set or configuration violates one of its invariants.
struct InvalidConfig : Error {
    using Error::Error;
};

/// Integration produced NaN or Inf. Usually means dt is too large for the
/// configured dynamics.
struct NonFiniteState : Error {
    NonFiniteState(double time, const std::string& what)
        : Error(what + " at t=" + std::to_string(time) + " s"), time(time) {}
    double time;
};

struct NotLeakOverThreshold : Error {
    using Error::Error;
};

struct WindowTooShort : Error {
    using Error::Error;
};

struct FitFailed : Error {
    using Error::Error;
};

struct NotMonotone : Error {
    using Error::Error;
};

/// Calibration ran out of iterations or the target lies outside the
/// reachable range. Carries the best setting found.
struct NotConverged : Error {
    NotConverged(const std::string& what, double best_bias, double best_residual)
        : Error(what), best_bias(best_bias), best_residual(best_residual) {}
    double best_bias;
    double best_residual;
};

} // namespace adexsim
