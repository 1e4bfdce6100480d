#pragma once

#include "adexsim/circuit.hpp"
#include "adexsim/trace.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace adexsim {

enum class FiringPatternLabel {
    tonic_spiking,
    adaptation,
    initial_burst,
    regular_bursting,
    delayed_accelerating,
    delayed_regular_bursting,
    transient_spiking,
    unclassified,
};

std::string_view label_name(FiringPatternLabel label);
/// Throws InvalidConfig for unknown names.
FiringPatternLabel parse_label(std::string_view name);

struct ClassifierThresholds {
    double delay_ratio = 3.0;         // first-spike latency / mean ISI
    double burst_ratio = 0.25;        // longest short ISI / shortest long ISI
    double tonic_cv = 0.05;
    double transient_fraction = 0.8;  // of the stimulus window
    std::size_t transient_min_spikes = 3;
    double monotone_slack = 0.02;     // of the mean ISI, tolerated reversals
};

/// Rule-based label for the spikes within [onset, onset + window]. Rules are
/// applied in order: fewer than two spikes, transient, delayed, bursting,
/// tonic, adaptation; anything left is unclassified. Only ratios of times
/// enter, so uniform rescaling of time does not change the label.
FiringPatternLabel classify_firing_pattern(std::span<const double> spikes, double stimulus_onset, double window,
                                           const ClassifierThresholds& thresholds = {});

struct PhasePoint {
    double V = 0.0;
    double w = 0.0;  // amperes
    bool operator==(const PhasePoint&) const = default;
};

/// (V, w) polyline with consecutive duplicates dropped. Throws InvalidConfig
/// for circuit traces, which need the adaptation circuit to map V_w to I_w.
std::vector<PhasePoint> phase_plane(const SimulationTrace& trace);
/// Circuit trace: w = g_w * (V_ref - V_w).
std::vector<PhasePoint> phase_plane(const SimulationTrace& trace, const AdaptationCircuitConfig& adaptation);

} // namespace adexsim
