#pragma once

#include "adexsim/adex.hpp"
#include "adexsim/circuit.hpp"

namespace adexsim {

/// Release from an offset, fit of a single exponential. Time scale hints
/// only choose the window and step; they do not enter the result.
struct ReleaseProtocol {
    double offset = 0.1;           // V
    double window_in_tau = 4.0;
    double steps_per_tau = 400.0;
    double min_r_squared = 0.99;
};

/// Fitted membrane time constant. Adaptation, exponential, synapses and the
/// threshold are switched off for the measurement. Throws FitFailed.
double measure_tau_m(const CircuitNeuronConfig& neuron, const ReleaseProtocol& protocol = {});
double measure_tau_m(const AdExParameters& p, const ReleaseProtocol& protocol = {});

/// Adaptation time constant from releasing V_w (or w) clamped away from its
/// rest with the coupling bias at zero.
double measure_tau_w(const CircuitNeuronConfig& neuron, const ReleaseProtocol& protocol = {0.05});
double measure_tau_w(const AdExParameters& p, const ReleaseProtocol& protocol = {});

struct StepResponseProtocol {
    double leak_boost = 5.0;       // leak multiplier during the measurement
    double deflection = 0.05;      // V, target membrane shift without adaptation
    double settle_in_tau = 15.0;   // window in units of the slowest time constant
    double steps_per_tau = 2.0;    // per fastest time constant; the fixed point is exact

};

/// Subthreshold adaptation from two steady-state step responses, with and
/// without the coupling: a = I/dV - I/dV_0. Uses the membrane only.
double measure_subthreshold_a(const CircuitNeuronConfig& neuron, const StepResponseProtocol& protocol = {});
double measure_subthreshold_a(const AdExParameters& p, const StepResponseProtocol& protocol = {});

/// Spike-triggered increment of I_w: one pulse from rest, decay after the
/// pulse fitted and extrapolated back to the pulse midpoint.
double measure_b(const CircuitNeuronConfig& neuron);

struct ExponentialSweep {
    double decades = 3.0;          // required span below saturation
    double step = 0.25e-3;         // V
    double span = 5.0;             // V, furthest excursion from V_exp
};

struct ExponentialMeasurement {
    double delta_t = 0.0;   // V
    double v_t = 0.0;       // V, where I_exp = g_l * delta_t
    double decades = 0.0;   // span used by the fit
    double r_squared = 0.0;
};

/// Voltage-clamp sweep of the exponential current with a log-linear fit.
/// `g_l` is the leak conductance used to place V_T. Throws FitFailed when
/// fewer than `decades` decades lie between the rectification floor and
/// a tenth of the ceiling.
ExponentialMeasurement measure_exponential(const CircuitNeuronConfig& neuron, double g_l,
                                           const ExponentialSweep& sweep = {});
ExponentialMeasurement measure_exponential(const AdExParameters& p, const ExponentialSweep& sweep = {});

/// Synaptic time constant from the line deflection after a unit event.
double measure_tau_syn(const CircuitNeuronConfig& neuron, SynapseSign side = SynapseSign::excitatory);

/// Signed PSP amplitude for one event of weight 1 from rest.
double measure_psp_amplitude(const CircuitNeuronConfig& neuron, SynapseSign side = SynapseSign::excitatory);
double measure_psp_amplitude(const AdExParameters& p, const SynapseConfig& syn);

/// Resting potential with the synaptic inputs connected but silent.
double measure_resting_potential(const CircuitNeuronConfig& neuron);

} // namespace adexsim
