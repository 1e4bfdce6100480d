#pragma once

#include "adexsim/adex.hpp"
#include "adexsim/calibration.hpp"
#include "adexsim/classify.hpp"
#include "adexsim/error.hpp"
#include "adexsim/experiments.hpp"
#include "adexsim/synapse.hpp"
#include "adexsim/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adexsim {

/// Syntax errors, unknown keys and malformed values. Line and column are
/// 1-based; 0 when unknown.
struct ParseError : Error {
    ParseError(const std::string& what, int line, int column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line(line), column(column) {}
    int line;
    int column;
};

/// Well-formed configuration that violates an invariant.
struct ValidationError : InvalidConfig {
    using InvalidConfig::InvalidConfig;
};

enum class Dimension { none, voltage, current, capacitance, conductance, time, resistance };

/// "20 us" -> 2e-05. Dimensioned quantities require a unit suffix,
/// dimensionless ones forbid it. Throws ParseError (line/column 0).
double parse_physical(std::string_view text, Dimension dim);
/// SI base unit, shortest representation that parses back exactly.
std::string format_physical(double value, Dimension dim);

enum class RunMode { simulate, calibrate, experiment, sweep };
enum class ModelKind { ideal, circuit };
enum class OutputFormat { csv, json };

inline constexpr std::uint64_t kDefaultSeed = 20170101;

struct StimulusSpec {
    double onset = 0.0;      // s
    double amplitude = 0.0;  // A
    double stop = -1.0;      // s, negative: never
    StimulusProgram program() const;
    bool operator==(const StimulusSpec&) const = default;
};

struct SynapseSpec {
    SynapseConfig config;
    std::vector<SpikeEvent> events;
    bool operator==(const SynapseSpec&) const = default;
};

struct LotSpec {
    std::vector<double> tau_m_targets{5e-6, 50e-6, 500e-6};
    double E_l = 0.7;
    double V_det = 0.5;
    double V_r = 0.3;
    double t_ref = 0.0;
    double I_stim = 0.0;
    std::size_t intervals = 8;
    double max_median_error = 0.05;
    bool include_uncalibrated = false;
    bool operator==(const LotSpec&) const = default;
};

struct PspSpec {
    double tau_syn = 5e-6;
    double amplitude = 0.01;
    double weight = 1.0;
    std::size_t n_events = 4;
    double max_amplitude_cv = 0.1;
    bool operator==(const PspSpec&) const = default;
};

struct CobaSpec {
    std::vector<double> reversals{0.45, 0.9};
    SynapseSign sign = SynapseSign::excitatory;
    double half_width = 0.1;
    std::size_t points = 9;
    double weight = 0.2;
    double tolerance = 2e-3;
    bool operator==(const CobaSpec&) const = default;
};

struct ExponentialSweepSpec {
    std::vector<double> onsets{0.4, 0.48, 0.56};
    std::vector<double> slopes{13e-3, 20e-3, 40e-3, 91e-3};
    double min_decades = 3.0;
    double max_slope_error = 0.03;
    double max_onset_slope_change = 0.02;
    bool operator==(const ExponentialSweepSpec&) const = default;
};

struct PatternsSpec {
    std::vector<std::string> files;  // relative to the config file
    double min_agreement = 0.95;
    bool circuit = true;
    double dt_bio = 10e-6;
    bool operator==(const PatternsSpec&) const = default;
};

struct SweepSpec {
    std::string parameter = "stimulus.amplitude";
    std::vector<double> values;
    bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
    RunMode mode = RunMode::simulate;
    ModelKind model = ModelKind::ideal;
    std::string experiment;
    std::uint64_t seed = kDefaultSeed;
    double dt = 0.01e-6;
    double duration = 100e-6;
    std::string output_dir;  // empty: command line or environment decides
    OutputFormat format = OutputFormat::csv;

    AdExParameters neuron;
    StimulusSpec stimulus;
    std::vector<SynapseSpec> synapses;

    PopulationSetup population;  // seed unused: run.seed applies
    std::vector<CalibratedQuantity> plan;  // empty: derived from the neuron

    LotSpec leak_over_threshold;
    PspSpec psp;
    CobaSpec coba_reversal;
    ExponentialSweepSpec exponential_sweep;
    PatternsSpec firing_patterns;
    SweepSpec sweep;

    bool operator==(const RunConfig&) const = default;
};

/// Throws ParseError and ValidationError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);
/// Throws ValidationError naming the violated invariant.
void validate(const RunConfig& cfg);

/// Firing-pattern parameter set file (biological units).
PatternSet parse_pattern_set(std::string_view text);
PatternSet load_pattern_set(const std::filesystem::path& path);
std::string serialize_pattern_set(const PatternSet& set);

/// Sweepable parameters: stimulus.amplitude, stimulus.onset and the neuron
/// fields (neuron.tau_m sets g_l = C/tau_m). Unknown names throw
/// InvalidConfig.
Dimension sweep_parameter_dimension(std::string_view parameter);
void apply_sweep_value(RunConfig& cfg, std::string_view parameter, double value);

std::string_view mode_name(RunMode m);
std::string_view model_name(ModelKind m);

} // namespace adexsim
