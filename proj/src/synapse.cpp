#include "adexsim/synapse.hpp"

#include "adexsim/error.hpp"

#include <cmath>

namespace adexsim {

void SynapseConfig::validate() const {
    if (!(tau_syn > 0.0)) {
        throw InvalidConfig("synapse: tau_syn must be > 0");
    }
    if (!(I_hat >= 0.0)) {
        throw InvalidConfig("synapse: I_hat must be >= 0");
    }
    if (!(g_hat >= 0.0)) {
        throw InvalidConfig("synapse: g_hat must be >= 0");
    }
}

WeightedSpikeTrain::WeightedSpikeTrain(std::vector<SpikeEvent> events) : events_(std::move(events)) {
    for (std::size_t i = 0; i < events_.size(); ++i) {
        if (!(events_[i].weight >= 0.0)) {
            throw InvalidConfig("spike train: weights must be >= 0");
        }
        if (i > 0 && events_[i].time < events_[i - 1].time) {
            throw InvalidConfig("spike train: event times must be non-decreasing");
        }
    }
}

std::size_t arrival_step(double t, double dt) {
    if (t <= 0.0) {
        return 0;
    }
    // Relative slack so an event placed exactly on a boundary is not pushed
    // one step late by rounding in t/dt.
    const double k = std::ceil(t / dt - 1e-9);
    return static_cast<std::size_t>(k < 0.0 ? 0.0 : k);
}

double trace_step(double s, double tau_syn, double dt, double arriving_weight_sum) {
    return s * std::exp(-dt / tau_syn) + arriving_weight_sum;
}

double synaptic_current(double s, const SynapseConfig& cfg, double V_m) {
    if (cfg.mode == SynapseMode::cuba) {
        const double sign = cfg.sign == SynapseSign::excitatory ? 1.0 : -1.0;
        return sign * cfg.I_hat * s;
    }
    return cfg.g_hat * s * (cfg.E_syn - V_m);
}

ArrivalCursor::ArrivalCursor(const WeightedSpikeTrain& train, double dt)
    : events_(&train.events()), dt_(dt) {}

double ArrivalCursor::take(std::size_t k) {
    double sum = 0.0;
    while (next_ < events_->size() && arrival_step((*events_)[next_].time, dt_) <= k) {
        sum += (*events_)[next_].weight;
        ++next_;
    }
    return sum;
}

PspMetrics psp_metrics(const SimulationTrace& trace, double stim_time) {
    const auto& xs = trace.samples;
    std::size_t n_pre = 0;
    double sum = 0.0;
    while (n_pre < xs.size() && trace.time_of(n_pre) < stim_time) {
        sum += xs[n_pre].V;
        ++n_pre;
    }
    if (n_pre < 10) {
        throw WindowTooShort("psp_metrics: fewer than 10 samples before the stimulus");
    }
    PspMetrics m;
    m.baseline = sum / static_cast<double>(n_pre);
    for (std::size_t k = n_pre; k < xs.size(); ++k) {
        const double d = xs[k].V - m.baseline;
        if (std::abs(d) > std::abs(m.amplitude)) {
            m.amplitude = d;
        }
    }
    return m;
}

} // namespace adexsim
