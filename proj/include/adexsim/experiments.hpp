#pragma once

#include "adexsim/adex.hpp"
#include "adexsim/calibration.hpp"
#include "adexsim/circuit.hpp"
#include "adexsim/classify.hpp"
#include "adexsim/mismatch.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adexsim {

/// Metrics of one neuron (or one configuration) within a group.
struct MetricRow {
    std::string group;
    std::size_t index = 0;
    std::map<std::string, double> values;
    std::map<std::string, std::string> labels;
    std::string error;  // empty unless this neuron failed
};

struct PopulationStats {
    std::string group;
    std::string metric;
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    bool operator==(const PopulationStats&) const = default;
};

/// A declared tolerance. `passed` is value <= limit or value >= limit.
struct Gate {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool upper = true;  // true: value <= limit
    bool passed = false;
};

struct NamedTrace {
    std::string name;
    SimulationTrace trace;
    std::optional<CircuitNeuronConfig> circuit;  // set for circuit traces
};

struct ExperimentReport {
    std::string experiment;
    std::vector<MetricRow> rows;
    std::vector<PopulationStats> stats;
    std::vector<Gate> gates;
    std::vector<NamedTrace> traces;

    bool passed() const;
    void add_gate(std::string name, double value, double limit, bool upper);
};

/// Statistics of every (group, metric) over the rows that carry it, sorted
/// by group then metric. Non-finite values are skipped.
std::vector<PopulationStats> compute_statistics(const std::vector<MetricRow>& rows);

struct PopulationSetup {
    std::size_t size = 128;
    std::uint64_t seed = 1;
    bool mismatch = true;
    bool calibrate = true;
    CalibrationOptions calibration{};
    bool operator==(const PopulationSetup&) const = default;
};

// ---------------------------------------------------------------------------

struct LeakOverThresholdConfig {
    std::vector<double> tau_m_targets;  // s
    double E_l = 0.7;                   // V, above threshold
    double V_det = 0.5;                 // V
    double V_r = 0.3;                   // V
    double t_ref = 0.0;                 // s
    double I_stim = 0.0;                // A
    std::size_t intervals = 8;          // ISIs averaged per neuron
    double steps_per_tau = 500.0;
    double max_median_error = 0.05;
    bool include_uncalibrated = false;  // control runs without calibration
    PopulationSetup population{};
};

/// Per target: calibrate the population's tau_m, measure each neuron's mean
/// ISI and compare with the closed-form prediction. One gate per target on
/// the median relative deviation.
ExperimentReport run_leak_over_threshold(const LeakOverThresholdConfig& cfg);

struct PspExperimentConfig {
    CircuitNeuronConfig nominal = nominal_circuit();  // syn_exc is enabled by the run
    double tau_syn = 5e-6;
    double amplitude = 0.01;        // V, PSP target
    double weight = 1.0;
    std::size_t n_events = 4;
    double max_amplitude_cv = 0.1;
    PopulationSetup population{};
};

/// Baseline and PSP amplitude per neuron before and after calibration of
/// tau_syn, tau_m, offsets and amplitude.
ExperimentReport run_psp_experiment(const PspExperimentConfig& cfg);

struct CobaSweepConfig {
    CircuitNeuronConfig neuron = nominal_circuit();
    std::vector<double> reversal_targets{0.45, 0.9};  // V, virtual E_syn
    SynapseSign sign = SynapseSign::excitatory;
    double sweep_half_width = 0.1;   // V around each reversal
    std::size_t points = 9;
    double weight = 0.2;
    double tolerance = 2e-3;         // V
};

/// PSP amplitude against holding potential (set through E_l, spiking off).
/// Points where the modulated bias is clamped at zero are excluded from the
/// affine fit; the zero crossing is compared with the virtual reversal.
ExperimentReport run_coba_sweep(const CobaSweepConfig& cfg);

struct ExponentialSweepConfig {
    CircuitNeuronConfig neuron = nominal_circuit();
    std::vector<double> onsets{0.4, 0.48, 0.56};         // V_exp values
    std::vector<double> slopes{13e-3, 20e-3, 40e-3, 91e-3};  // Delta_T targets
    double min_decades = 3.0;
    double max_slope_error = 0.03;
    double max_onset_slope_change = 0.02;
};

ExperimentReport run_exponential_sweep(const ExponentialSweepConfig& cfg);

/// A firing-pattern parameter set in biological units.
struct PatternSet {
    std::string name;
    FiringPatternLabel expected = FiringPatternLabel::unclassified;
    AdExParameters params;
    double I_stim = 0.0;     // A
    double onset = 20e-3;    // s
    double window = 500e-3;  // s, stimulus duration
    bool operator==(const PatternSet&) const = default;
};

struct FiringPatternConfig {
    std::vector<PatternSet> sets;
    DomainMapping mapping{};
    double dt_bio = 10e-6;         // s, ideal-model step in biological time
    double min_agreement = 0.95;
    bool run_circuit = true;
    bool keep_traces = true;
    ClassifierThresholds thresholds{};
    PopulationSetup population{};
};

/// (a) ideal model in the biological domain, (b) calibrated circuit
/// population in the hardware domain. Gates: ideal label matches, and the
/// circuit agreement fraction reaches min_agreement.
ExperimentReport run_firing_patterns(const FiringPatternConfig& cfg);

/// Circuit targets implied by a hardware-domain parameter set.
CalibrationTarget target_from(const AdExParameters& hw);

} // namespace adexsim
