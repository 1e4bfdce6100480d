#pragma once

#include "adexsim/trace.hpp"

#include <vector>

namespace adexsim {

enum class SynapseMode { cuba, coba };
enum class SynapseSign { excitatory, inhibitory };

struct SynapseConfig {
    SynapseMode mode = SynapseMode::cuba;
    double tau_syn = 5e-6;  // s
    double I_hat = 0.0;     // A, current-based gain
    double g_hat = 0.0;     // S, conductance-based gain
    double E_syn = 0.0;     // V, conductance-based reversal
    SynapseSign sign = SynapseSign::excitatory;

    void validate() const;
    bool operator==(const SynapseConfig&) const = default;
};

struct SpikeEvent {
    double time = 0.0;
    double weight = 0.0;
    bool operator==(const SpikeEvent&) const = default;
};

/// Presynaptic events onto one synaptic input, times non-decreasing,
/// weights non-negative.
class WeightedSpikeTrain {
public:
    WeightedSpikeTrain() = default;
    explicit WeightedSpikeTrain(std::vector<SpikeEvent> events);

    const std::vector<SpikeEvent>& events() const { return events_; }
    bool empty() const { return events_.empty(); }

    bool operator==(const WeightedSpikeTrain&) const = default;

private:
    std::vector<SpikeEvent> events_;
};

struct SynapticInput {
    SynapseConfig config;
    WeightedSpikeTrain train;
};

/// Index of the sample boundary at which an event at time t is applied:
/// events between boundaries take effect at the next one.
std::size_t arrival_step(double t, double dt);

/// Exact exponential decay over dt followed by the jump from arrivals at the
/// closing boundary.
double trace_step(double s, double tau_syn, double dt, double arriving_weight_sum);

/// Membrane current for trace value s. Current-based: +/- I_hat*s.
/// Conductance-based: g_hat*s*(E_syn - V_m); the sign flag does not apply
/// since the reversal potential already sets the polarity.
double synaptic_current(double s, const SynapseConfig& cfg, double V_m);

/// Walks a spike train alongside a fixed-step integration and hands out the
/// weight arriving at each boundary.
class ArrivalCursor {
public:
    ArrivalCursor(const WeightedSpikeTrain& train, double dt);
    /// Sum of weights applied at boundary k. Calls must use increasing k.
    double take(std::size_t k);

private:
    const std::vector<SpikeEvent>* events_;
    double dt_;
    std::size_t next_ = 0;
};

struct PspMetrics {
    double baseline = 0.0;  // V
    double amplitude = 0.0; // V, signed
};

/// Baseline is the mean membrane potential over the samples before
/// stim_time (at least ten required); amplitude is the largest signed
/// excursion from it afterwards.
PspMetrics psp_metrics(const SimulationTrace& trace, double stim_time);

} // namespace adexsim
