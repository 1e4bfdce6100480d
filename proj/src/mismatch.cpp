#include "adexsim/mismatch.hpp"

#include "adexsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace adexsim {

double VariabilityRange::sigma_at(double value) const {
    if (!(value > low_value)) {
        return low_sigma;
    }
    if (value >= high_value) {
        return high_sigma;
    }
    const double f = std::log(value / low_value) / std::log(high_value / low_value);
    return low_sigma + f * (high_sigma - low_sigma);
}

void MismatchModel::validate() const {
    const auto& known = device_constant_names();
    for (const auto& [name, sigma] : sigma_rel) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw InvalidConfig("mismatch: unknown device constant '" + name + "'");
        }
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw InvalidConfig("mismatch: sigma_rel for '" + name + "' must be finite and >= 0");
        }
    }
}

MismatchModel table_mismatch(const CircuitNeuronConfig& nominal, std::uint64_t seed) {
    MismatchModel mm;
    mm.seed = seed;
    auto& s = mm.sigma_rel;
    s["leak.g_per_bias"] = variability::tau_m.sigma_at(nominal.tau_m());
    const auto& ad = nominal.adaptation;
    s["adaptation.g_tau_per_bias"] = variability::tau_w.sigma_at(ad.g_tau() > 0.0 ? ad.tau_w() : 0.0);
    s["adaptation.g_a_per_bias"] =
        variability::a.sigma_at(ad.g_tau() > 0.0 ? std::abs(ad.g_a() * ad.g_w() / ad.g_tau()) : 0.0);
    const auto& ex = nominal.exponential;
    s["exponential.g_per_bias"] = variability::delta_t.sigma_at(ex.g_ota() > 0.0 ? ex.delta_t_eff() : 0.0);
    s["exponential.I_0"] = variability::I_0;
    for (const auto* side : {"syn_exc", "syn_inh"}) {
        const auto& syn = std::string(side) == "syn_exc" ? nominal.syn_exc : nominal.syn_inh;
        const std::string p(side);
        s[p + ".g_line_per_bias"] = variability::tau_syn.sigma_at(syn.g_leak_line() > 0.0 ? syn.tau_syn() : 0.0);
        s[p + ".g1_per_bias"] = variability::I_syn.sigma_at(syn.ota1.transconductance() * syn.jump_per_weight());
        s[p + ".follower_drop_a"] = variability::follower_drop;
        s[p + ".follower_drop_b"] = variability::follower_drop;
    }
    return mm;
}

Population sample_population(const CircuitNeuronConfig& nominal, const MismatchModel& mm, std::size_t n) {
    if (n < 1) {
        throw InvalidConfig("sample_population: n must be >= 1");
    }
    mm.validate();
    std::mt19937_64 rng(mm.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Population pop;
    pop.neurons.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CircuitNeuronConfig cfg = nominal;
        // std::map iterates in name order, so the draw sequence is fixed.
        for (const auto& [name, sigma] : mm.sigma_rel) {
            const double z = normal(rng);
            if (sigma == 0.0) {
                continue;
            }
            const double s2 = std::log1p(sigma * sigma);
            device_constant(cfg, name) *= std::exp(std::sqrt(s2) * z - 0.5 * s2);
        }
        pop.neurons.push_back(cfg);
    }
    return pop;
}

} // namespace adexsim
