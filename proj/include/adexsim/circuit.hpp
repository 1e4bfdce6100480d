#pragma once

#include "adexsim/adex.hpp"
#include "adexsim/synapse.hpp"
#include "adexsim/trace.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace adexsim {

/// Argument x at which tanh(x)/x = 0.95. An OTA is configured so that its
/// output deviates from the linear characteristic by exactly 5% at +/-V_lin.
inline constexpr double kOtaLinearRangeArgument = 0.39945811229272604;

/// Largest selectable membrane capacitance.
inline constexpr double kMaxMembraneCapacitance = 2.47e-12;

/// Bulk-driven transconductance amplifier. The transfer curve is
/// I_sat * tanh(g * dV / I_sat) with g = g_per_bias * I_bias and
/// I_sat = min(I_out_max, g * V_lin / kOtaLinearRangeArgument).
struct OtaModel {
    double I_bias = 0.0;       // A
    double g_per_bias = 5.0;   // S/A, device constant
    double V_lin = 0.4;        // V
    double I_out_max = 10e-6;  // A

    double transconductance() const { return g_per_bias * I_bias; }
    double saturation_current() const;
    bool operator==(const OtaModel&) const = default;
};

double ota_output(const OtaModel& ota, double V_plus, double V_minus);
/// Output current over input voltage; the small-signal g at dV = 0.
double ota_secant_conductance(const OtaModel& ota, double dV);

enum class Polarity { positive, negative };

/// Adaptation low-pass filter. The state is the voltage V_w on C_w; the
/// current onto the membrane is I_w = g_w * (V_ref - V_w) with
/// g_w = g_w_factor * g_tau. Positive polarity and positive pulse amplitude
/// both raise I_w, i.e. pull V_w below V_ref.
struct AdaptationCircuitConfig {
    double C_w = 8e-12;             // F
    OtaModel tau_ota{};             // bias I_b_tau, sets g_tau
    OtaModel a_ota{};               // bias I_b_a, sets g_a
    double g_w_factor = 12.0;
    double V_ref = 0.8;             // V
    double E_l_adapt = 0.3;         // V
    Polarity sign = Polarity::positive;
    double pulse_amplitude = 0.0;   // A, signed
    double pulse_width = 0.2e-6;    // s
    bool enabled = false;

    double g_tau() const { return tau_ota.transconductance(); }
    double g_a() const { return a_ota.transconductance(); }
    double g_w() const { return g_w_factor * g_tau(); }
    double tau_w() const { return C_w / g_tau(); }
    double a() const;
    double b() const;
    bool operator==(const AdaptationCircuitConfig&) const = default;
};

/// Weak-inversion exponential feedback. An OTA converts V_m - V_exp into a
/// current, r_conv turns that into the gate drive of the exponential device.
struct ExponentialCircuitConfig {
    double I_0 = 1e-9;          // A
    OtaModel ota{};             // g_ota = ota.transconductance()
    double r_conv = 1e6;        // ohm
    double n = 1.5;
    double V_therm = 25.85e-3;  // V
    double V_exp = 0.48;        // V
    double I_max = 5e-6;        // A
    bool enabled = false;
    bool gate_in_refractory = true;

    double g_ota() const { return ota.transconductance(); }
    /// n * V_therm / (8 * g_ota * r_conv)
    double delta_t_eff() const;
    bool operator==(const ExponentialCircuitConfig&) const = default;
};

/// Synaptic input: the synaptic line integrates charge packets and leaks
/// through weak-inversion devices (tau_syn = C_line / g_leak_line). OTA1
/// turns the line deflection into membrane current; in conductance mode
/// OTA2 modulates OTA1's bias with the membrane potential.
struct SynInCircuitConfig {
    double C_line = 1e-12;            // F
    double I_b_tau = 10e-9;           // A, line-leak bias
    double g_line_per_bias = 20.0;    // S/A, device constant
    OtaModel ota1{};                  // bias I_b_cuba
    double g2 = 1e-6;                 // S
    double E_syn_hat = 0.6;           // V
    double follower_drop_a = 0.3;     // V, device constant
    double follower_drop_b = 0.3;     // V, device constant
    double follower_offset = 0.0;     // V, tunable offset compensation
    double charge_per_weight = 10e-15;// C per unit weight
    bool coba_enabled = false;
    SynapseSign sign = SynapseSign::excitatory;
    bool enabled = false;

    double I_b_cuba() const { return ota1.I_bias; }
    double g_leak_line() const { return g_line_per_bias * I_b_tau; }
    double tau_syn() const { return C_line / g_leak_line(); }
    /// Line deflection per unit weight.
    double jump_per_weight() const { return charge_per_weight / C_line; }
    /// Residual offset seen by OTA1 with no input.
    double input_offset() const { return follower_drop_a - follower_drop_b + follower_offset; }
    /// Reversal potential synthesized by the bias modulation:
    /// E_syn_hat + I_b_cuba/g2 (excitatory) or E_syn_hat - I_b_cuba/g2.
    double virtual_reversal() const;
    bool operator==(const SynInCircuitConfig&) const = default;
};

struct DigitalEnables {
    bool leak = true;
    bool threshold = true;
    bool operator==(const DigitalEnables&) const = default;
};

struct CircuitNeuronConfig {
    double C_mem = kMaxMembraneCapacitance; // F
    OtaModel leak{};
    double E_l = 0.3;     // V
    double V_det = 0.7;   // V
    double V_r = 0.3;     // V
    double t_ref = 0.0;   // s
    AdaptationCircuitConfig adaptation{};
    ExponentialCircuitConfig exponential{};
    SynInCircuitConfig syn_exc{};
    SynInCircuitConfig syn_inh{};
    DigitalEnables enables{};

    double tau_m() const { return C_mem / leak.transconductance(); }
    /// Throws InvalidConfig naming the first violated invariant.
    void validate() const;
    bool operator==(const CircuitNeuronConfig&) const = default;
};

struct CircuitState {
    double V_m = 0.0;             // V
    double V_w = 0.0;             // V
    double s_exc = 0.0;           // V, synaptic line deflection
    double s_inh = 0.0;           // V
    double ref_remaining = 0.0;   // s
    double pulse_remaining = 0.0; // s, adaptation pulse still to deliver

    bool operator==(const CircuitState&) const = default;
};

CircuitState resting_state(const CircuitNeuronConfig& cfg);

/// Instantaneous adaptation dynamics: dV_w/dt and the membrane current I_w.
struct AdaptationRates {
    double dV_w_dt = 0.0;
    double I_w = 0.0;
};
AdaptationRates adaptation_dynamics(const CircuitState& state, const AdaptationCircuitConfig& cfg,
                                    bool spike_pulse_active);

/// I_w = g_w * (V_ref - V_w); zero when the circuit is disabled.
double adaptation_current(double V_w, const AdaptationCircuitConfig& cfg);

/// Rectified, saturating exponential current. Output below
/// I_0 * kExpRectificationFloor is cut to zero.
double exponential_current(double V_m, const ExponentialCircuitConfig& cfg, bool in_refractory);
inline constexpr double kExpRectificationFloor = 1e-6;

/// Bias of OTA1 in conductance mode, clamped at zero.
double coba_effective_bias(double V_m, const SynInCircuitConfig& cfg);

/// Signed membrane current from one synaptic input for line deflection s.
double synaptic_input_current(double s, double V_m, const SynInCircuitConfig& cfg);

/// Weight sums arriving at the start of a step.
struct SynapticArrivals {
    double exc = 0.0;
    double inh = 0.0;
};

struct CircuitStepResult {
    CircuitState state;
    bool spiked = false;
};

/// One exponential-Euler step of the composed circuit. Nonlinear OTAs enter
/// through their secant conductance, which reduces to the ideal scheme in
/// the linear regime. Throws NonFiniteState.
CircuitStepResult circuit_step(const CircuitState& state, const CircuitNeuronConfig& cfg, double I_stim,
                               const SynapticArrivals& arrivals, double dt);

struct CircuitSimulationOptions {
    bool record = true;
    bool use_initial = false;
    CircuitState initial{};
};

/// Trace columns: V = V_m, w = V_w (AdaptationQuantity::voltage), and the
/// synaptic line deflections.
SimulationTrace circuit_simulate(const CircuitNeuronConfig& cfg, const StimulusProgram& stimulus,
                                 const WeightedSpikeTrain& exc, const WeightedSpikeTrain& inh,
                                 double duration, double dt, const CircuitSimulationOptions& options = {});

/// Ideal-model parameters implied by the circuit constants.
AdExParameters derive_effective_adex(const CircuitNeuronConfig& cfg);

/// Single derived quantities; throw InvalidConfig when the owning sub-circuit
/// is disabled.
double effective_tau_w(const CircuitNeuronConfig& cfg);
double effective_a(const CircuitNeuronConfig& cfg);
double effective_b(const CircuitNeuronConfig& cfg);
double effective_delta_t(const CircuitNeuronConfig& cfg);
double effective_v_t(const CircuitNeuronConfig& cfg);
double effective_tau_syn(const SynInCircuitConfig& syn);

/// Ideal synapse equivalent of a synaptic input circuit. The ideal trace is
/// the line deflection divided by jump_per_weight().
SynapseConfig equivalent_synapse(const SynInCircuitConfig& syn);
/// Inverse of equivalent_synapse: sets the line-leak bias, OTA1's bias
/// (current mode) or g2 and E_syn_hat (conductance mode) of `base`, which
/// ends up enabled. Throws InvalidConfig for non-positive gains.
SynInCircuitConfig synapse_circuit_for(const SynapseConfig& s, SynInCircuitConfig base);

/// Nominal device constants and biases of an uncalibrated neuron.
CircuitNeuronConfig nominal_circuit();

/// Biases that make `base`'s devices realize `p`. Throws InvalidConfig when
/// p cannot be represented (e.g. C above the selectable maximum).
CircuitNeuronConfig ideal_equivalent_circuit(const AdExParameters& p,
                                             const CircuitNeuronConfig& base = nominal_circuit());

/// Named access to device constants (subject to mismatch) and to tunable
/// biases (subject to calibration). Unknown names throw InvalidConfig.
const std::vector<std::string>& device_constant_names();
double& device_constant(CircuitNeuronConfig& cfg, std::string_view name);
const std::vector<std::string>& bias_names();
double& bias(CircuitNeuronConfig& cfg, std::string_view name);
double bias(const CircuitNeuronConfig& cfg, std::string_view name);

} // namespace adexsim
