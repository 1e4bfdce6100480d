#pragma once

#include "adexsim/circuit.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace adexsim {

/// Relative spread of a parameter quoted at both ends of its tunable range.
/// In between, sigma_rel is interpolated linearly in log(value); outside it
/// is held at the nearer endpoint.
struct VariabilityRange {
    double low_value;
    double low_sigma;
    double high_value;
    double high_sigma;

    double sigma_at(double value) const;
};

namespace variability {
// Hardware units: seconds, amperes, siemens, volts.
inline constexpr VariabilityRange tau_m{0.6e-6, 0.2 / 0.6, 915e-6, 140.0 / 915.0};
inline constexpr VariabilityRange tau_syn{0.29e-6, 0.03 / 0.29, 538e-6, 98.0 / 538.0};
inline constexpr VariabilityRange I_syn{0.033e-6, 0.003 / 0.033, 1.15e-6, 0.03 / 1.15};
inline constexpr VariabilityRange tau_w{22e-6, 3.0 / 22.0, 853e-6, 117.0 / 853.0};
inline constexpr VariabilityRange a{30e-9, 4.0 / 30.0, 1065e-9, 114.0 / 1065.0};
inline constexpr VariabilityRange delta_t{13e-3, 2.0 / 13.0, 91e-3, 46.0 / 91.0};
// Not quoted; assumed.
inline constexpr double I_0 = 0.2;
inline constexpr double follower_drop = 0.02;
} // namespace variability

/// Per-constant relative standard deviation, keyed by device_constant_names().
/// Multipliers are lognormal with mean 1 and std/mean = sigma_rel.
struct MismatchModel {
    std::map<std::string, double> sigma_rel;
    std::uint64_t seed = 0;

    /// Throws InvalidConfig for negative sigmas or unknown names.
    void validate() const;
};

/// Spreads derived from the variability table, evaluated at the nominal
/// neuron's own parameter values.
MismatchModel table_mismatch(const CircuitNeuronConfig& nominal, std::uint64_t seed);

struct Population {
    std::vector<CircuitNeuronConfig> neurons;
};

/// n mismatched copies of `nominal`. Deterministic in (nominal, mm, n).
Population sample_population(const CircuitNeuronConfig& nominal, const MismatchModel& mm, std::size_t n);

} // namespace adexsim
