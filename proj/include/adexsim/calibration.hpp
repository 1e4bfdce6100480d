#pragma once

#include "adexsim/circuit.hpp"
#include "adexsim/mismatch.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adexsim {

using MeasureFn = std::function<double(const CircuitNeuronConfig&)>;

struct BiasBounds {
    double lo;
    double hi;
};

struct ParameterCalibration {
    double bias = 0.0;
    double measured = 0.0;
    double residual = 0.0;  // |measured - target| / |target|
    int iterations = 0;     // number of measurements taken
};

/// Tunes one bias of `neuron` until the measured value is within `tol`
/// (relative) of `target`. The first measurement is taken at the current
/// bias; if that misses, a three-point probe over `bounds` checks
/// monotonicity and brackets the target, then false position (Illinois
/// variant) refines it. Biases with bounds of one sign are searched in log
/// space. On failure the neuron is left at the best bias seen.
/// Throws NotMonotone, NotConverged and whatever `measure` throws.
ParameterCalibration calibrate_parameter(CircuitNeuronConfig& neuron, double target, std::string_view bias_name,
                                         const MeasureFn& measure, BiasBounds bounds, double tol,
                                         int max_iter);

/// Calibratable quantities in their dependency order.
enum class CalibratedQuantity { tau_syn, tau_m, offset, delta_t, v_t, tau_w, a, b, psp_amplitude };

std::string_view quantity_name(CalibratedQuantity q);
/// Throws InvalidConfig for unknown names.
CalibratedQuantity parse_quantity(std::string_view name);

/// Targets in hardware units. Unset entries must not appear in the plan,
/// except offset whose target is E_l.
struct CalibrationTarget {
    std::optional<double> tau_syn;
    std::optional<double> tau_m;
    std::optional<double> delta_t;
    std::optional<double> v_t;
    std::optional<double> tau_w;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> psp_amplitude;
};

/// Throws InvalidConfig unless `plan` lists distinct quantities in
/// dependency order.
void validate_plan(const std::vector<CalibratedQuantity>& plan);

/// Plan covering every target that is set, in dependency order.
std::vector<CalibratedQuantity> default_plan(const CalibrationTarget& target, bool with_offset = false);

struct CalibrationOptions {
    double tol = 0.01;
    /// Potentials (offsets against E_l, and V_T) need a tighter relative
    /// tolerance: 1% of V_T is a sizeable fraction of Delta_T.
    double potential_tol = 1e-3;
    int max_iter = 40;
    unsigned jobs = 1;
    bool operator==(const CalibrationOptions&) const = default;
};

struct QuantityOutcome {
    CalibratedQuantity quantity = CalibratedQuantity::tau_m;
    std::string bias_name;
    double target = 0.0;
    double bias = 0.0;
    double pre_measured = 0.0;
    double post_measured = 0.0;
    double pre_residual = 0.0;
    double post_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string error;  // empty unless the calibration step threw
};

struct NeuronCalibration {
    CircuitNeuronConfig config;  // calibrated biases
    std::vector<QuantityOutcome> outcomes;

    bool converged() const;
};

struct SpreadSummary {
    CalibratedQuantity quantity = CalibratedQuantity::tau_m;
    double pre_mean = 0.0;
    double pre_cv = 0.0;   // std / |mean|
    double post_mean = 0.0;
    double post_cv = 0.0;
    std::size_t failures = 0;
};

struct CalibrationResult {
    std::vector<NeuronCalibration> neurons;  // in population order
    std::vector<SpreadSummary> spread;       // one per plan entry

    bool all_converged() const;
    std::size_t converged_count() const;
};

NeuronCalibration calibrate_neuron(const CircuitNeuronConfig& neuron, const CalibrationTarget& target,
                                   const std::vector<CalibratedQuantity>& plan,
                                   const CalibrationOptions& options = {});

/// Calibrates every neuron independently. Failures are recorded per neuron
/// and do not abort the run. The result does not depend on options.jobs.
CalibrationResult calibrate_population(const Population& population, const CalibrationTarget& target,
                                       const std::vector<CalibratedQuantity>& plan,
                                       const CalibrationOptions& options = {});

} // namespace adexsim
