#pragma once

#include "adexsim/synapse.hpp"
#include "adexsim/trace.hpp"

#include <span>
#include <vector>

namespace adexsim {

/// Constants of the ideal adaptive exponential integrate-and-fire neuron,
/// in SI units and hardware time.
struct AdExParameters {
    double C = 2.47e-12;     // F
    double g_l = 247e-9;     // S
    double E_l = 0.3;        // V
    double V_T = 0.5;        // V, soft threshold
    double Delta_T = 0.02;   // V, exponential slope
    double tau_w = 100e-6;   // s
    double a = 0.0;          // S, subthreshold adaptation
    double b = 0.0;          // A, spike-triggered adaptation
    double V_r = 0.3;        // V, reset
    double V_det = 0.7;      // V, numerical spike detection
    double t_ref = 0.0;      // s
    bool exp_enabled = true;
    bool exp_gated_in_ref = true;

    double tau_m() const { return C / g_l; }
    /// Throws InvalidConfig naming the first violated invariant.
    void validate() const;

    bool operator==(const AdExParameters&) const = default;
};

struct NeuronState {
    double V = 0.0;             // V
    double w = 0.0;             // A
    double ref_remaining = 0.0; // s

    bool operator==(const NeuronState&) const = default;
};

/// Resting state (E_l, 0) of a parameter set.
NeuronState resting_state(const AdExParameters& p);

/// Order of the integration scheme used by step() and simulate().
inline constexpr int kSchemeOrder = 1;

/// Upper clamp on the argument of the exponential term.
inline constexpr double kExpArgumentClamp = 20.0;

/// Exponential spike-initiation current g_l*Delta_T*exp((V-V_T)/Delta_T);
/// zero when disabled or gated by the refractory period.
double exponential_current(const NeuronState& state, const AdExParameters& p);

/// dV/dt of the ideal model for an external current I_ext.
double membrane_derivative(const NeuronState& state, const AdExParameters& p, double I_ext);

/// dw/dt = (a*(V - E_l) - w) / tau_w.
double adaptation_derivative(const NeuronState& state, const AdExParameters& p);

/// V -> V_r, w -> w + b, refractory timer restarted.
NeuronState apply_spike_reset(const NeuronState& state, const AdExParameters& p);

/// Input to one step beyond the adaptation current. Synaptic conductances
/// enter the linear part of the update together with the leak.
struct MembraneDrive {
    double current = 0.0;           // A
    double conductance = 0.0;       // S
    double conductance_reversal = 0.0; // S*V, sum of g_i*E_i
};

struct StepResult {
    NeuronState state;
    bool spiked = false;
};

/// Advances the state by dt with the exponential-Euler scheme. The leak and
/// adaptation relaxations are integrated exactly over the step; the
/// exponential current, adaptation coupling and drive are held at their
/// start-of-step values. A spike is registered at the end of the step in
/// which V first reaches V_det. Throws NonFiniteState.
StepResult step(const NeuronState& state, const AdExParameters& p, double I_ext, double dt);
StepResult step(const NeuronState& state, const AdExParameters& p, const MembraneDrive& drive,
                double dt);

struct SimulationOptions {
    bool record = true;
    NeuronState initial{};
    bool use_initial = false; ///< start from `initial` instead of resting_state()
};

/// Fixed-step simulation over [0, duration]. Deterministic: identical inputs
/// give bit-identical traces. Throws InvalidConfig and NonFiniteState.
SimulationTrace simulate(const AdExParameters& p, const StimulusProgram& stimulus,
                         std::span<const SynapticInput> synaptic_inputs, double duration, double dt,
                         const SimulationOptions& options = {});

/// Closed-form interspike interval of the leaky integrate-and-fire reduction
/// in the leak-over-threshold regime. Requires exp disabled and a = b = 0.
/// Throws NotLeakOverThreshold when E_l + I_ext/g_l <= V_det.
double predicted_lot_isi(const AdExParameters& p, double I_ext);

/// Affine map between the biological and the hardware domain. Hardware runs
/// `speedup` times faster; voltages map as V_hw = offset + gain*(V_bio - anchor).
struct DomainMapping {
    double speedup = 1000.0;
    double voltage_gain = 10.0;
    double voltage_anchor = -0.050; // V, biological potential mapped to `voltage_offset`
    double voltage_offset = 0.5;    // V
    double capacitance = 2.47e-12;  // F, hardware membrane capacitance
};

/// Hardware-domain parameters with identical dimensionless dynamics.
/// Returns the current scale factor through `current_scale` if non-null.
AdExParameters to_hardware(const AdExParameters& bio, const DomainMapping& m,
                           double* current_scale = nullptr);
double hardware_time_to_bio(double t_hw, const DomainMapping& m);
double bio_time_to_hardware(double t_bio, const DomainMapping& m);

} // namespace adexsim
