#include "adexsim/adex.hpp"

#include "adexsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adexsim {

void AdExParameters::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw InvalidConfig(std::string("AdEx parameters: ") + what);
        }
    };
    require(C > 0.0, "C must be > 0");
    require(g_l >= 0.0, "g_l must be >= 0");
    require(tau_w > 0.0, "tau_w must be > 0");
    require(t_ref >= 0.0, "t_ref must be >= 0");
    require(std::isfinite(E_l) && std::isfinite(V_r) && std::isfinite(V_det) &&
                std::isfinite(V_T) && std::isfinite(a) && std::isfinite(b),
            "all potentials and adaptation constants must be finite");
    if (exp_enabled) {
        require(Delta_T > 0.0, "Delta_T must be > 0 when the exponential term is enabled");
        require(V_det > V_T, "V_det must exceed V_T when the exponential term is enabled");
    }
}

NeuronState resting_state(const AdExParameters& p) { return {p.E_l, 0.0, 0.0}; }

double exponential_current(const NeuronState& state, const AdExParameters& p) {
    if (!p.exp_enabled || (p.exp_gated_in_ref && state.ref_remaining > 0.0)) {
        return 0.0;
    }
    const double arg = std::min((state.V - p.V_T) / p.Delta_T, kExpArgumentClamp);
    return p.g_l * p.Delta_T * std::exp(arg);
}

double membrane_derivative(const NeuronState& state, const AdExParameters& p, double I_ext) {
    return (-p.g_l * (state.V - p.E_l) + exponential_current(state, p) - state.w + I_ext) / p.C;
}

double adaptation_derivative(const NeuronState& state, const AdExParameters& p) {
    return (p.a * (state.V - p.E_l) - state.w) / p.tau_w;
}

NeuronState apply_spike_reset(const NeuronState& state, const AdExParameters& p) {
    return {p.V_r, state.w + p.b, p.t_ref};
}

StepResult step(const NeuronState& state, const AdExParameters& p, double I_ext, double dt) {
    return step(state, p, MembraneDrive{I_ext, 0.0, 0.0}, dt);
}

StepResult step(const NeuronState& state, const AdExParameters& p, const MembraneDrive& drive,
                double dt) {
    if (!(dt > 0.0)) {
        throw InvalidConfig("step: dt must be > 0");
    }
    const bool in_ref = state.ref_remaining > 0.0;
    const double ref_part = std::min(state.ref_remaining, dt);
    const double free = dt - ref_part;

    StepResult out;
    out.state.ref_remaining = state.ref_remaining - ref_part;

    const double w_inf = p.a * (state.V - p.E_l);
    out.state.w = w_inf + (state.w - w_inf) * std::exp(-dt / p.tau_w);

    if (free > 0.0) {
        // Whatever is left of the step after the refractory period ends
        // starts from the clamped reset potential with the exponential
        // term released.
        const NeuronState start{in_ref ? p.V_r : state.V, state.w, 0.0};
        const double forcing = exponential_current(start, p) - state.w + drive.current;
        const double g_total = p.g_l + drive.conductance;
        if (g_total > 0.0) {
            const double V_inf = (p.g_l * p.E_l + drive.conductance_reversal + forcing) / g_total;
            out.state.V = V_inf + (start.V - V_inf) * std::exp(-free * g_total / p.C);
        } else {
            out.state.V = start.V + free * forcing / p.C;
        }
        if (out.state.V >= p.V_det) {
            out.state = apply_spike_reset(out.state, p);
            out.spiked = true;
        }
    } else {
        out.state.V = p.V_r;
    }

    if (!std::isfinite(out.state.V) || !std::isfinite(out.state.w)) {
        throw NonFiniteState(0.0, "step produced a non-finite state (dt too large?)");
    }
    return out;
}

namespace {

struct SynapseChannel {
    const SynapticInput* input;
    ArrivalCursor cursor;
    double decay;
    double s = 0.0;
};

} // namespace

SimulationTrace simulate(const AdExParameters& p, const StimulusProgram& stimulus,
                         std::span<const SynapticInput> synaptic_inputs, double duration, double dt,
                         const SimulationOptions& options) {
    p.validate();
    if (!(duration > 0.0) || !(dt > 0.0)) {
        throw InvalidConfig("simulate: duration and dt must be > 0");
    }
    std::vector<SynapseChannel> channels;
    channels.reserve(synaptic_inputs.size());
    for (const auto& in : synaptic_inputs) {
        in.config.validate();
        channels.push_back({&in, ArrivalCursor(in.train, dt), std::exp(-dt / in.config.tau_syn)});
    }

    const auto n_steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
    SimulationTrace trace;
    trace.dt = dt;
    trace.w_quantity = AdaptationQuantity::current;
    if (options.record) {
        trace.samples.reserve(n_steps + 1);
    }

    NeuronState state = options.use_initial ? options.initial : resting_state(p);
    for (std::size_t k = 0;; ++k) {
        TraceSample sample{state.V, state.w, 0.0, 0.0};
        MembraneDrive drive;
        for (auto& ch : channels) {
            ch.s += ch.cursor.take(k);
            const SynapseConfig& cfg = ch.input->config;
            if (cfg.sign == SynapseSign::excitatory) {
                sample.s_exc += ch.s;
            } else {
                sample.s_inh += ch.s;
            }
            if (cfg.mode == SynapseMode::cuba) {
                drive.current += synaptic_current(ch.s, cfg, state.V);
            } else {
                const double g = cfg.g_hat * ch.s;
                drive.conductance += g;
                drive.conductance_reversal += g * cfg.E_syn;
            }
        }
        if (options.record) {
            trace.samples.push_back(sample);
        }
        if (k == n_steps) {
            break;
        }
        const double t = static_cast<double>(k) * dt;
        drive.current += stimulus.current_at(t);
        StepResult r;
        try {
            r = step(state, p, drive, dt);
        } catch (const NonFiniteState&) {
            throw NonFiniteState(t, "simulate: non-finite state");
        }
        state = r.state;
        if (r.spiked) {
            trace.spikes.push_back(static_cast<double>(k + 1) * dt);
        }
        for (auto& ch : channels) {
            ch.s *= ch.decay;
        }
    }
    return trace;
}

double predicted_lot_isi(const AdExParameters& p, double I_ext) {
    if (p.exp_enabled || p.a != 0.0 || p.b != 0.0) {
        throw InvalidConfig("predicted_lot_isi: requires exp disabled and a = b = 0");
    }
    if (!(p.g_l > 0.0)) {
        throw InvalidConfig("predicted_lot_isi: requires g_l > 0");
    }
    const double V_inf = p.E_l + I_ext / p.g_l;
    if (!(V_inf > p.V_det)) {
        throw NotLeakOverThreshold("predicted_lot_isi: asymptotic potential does not exceed V_det");
    }
    return p.t_ref + p.tau_m() * std::log((V_inf - p.V_r) / (V_inf - p.V_det));
}

AdExParameters to_hardware(const AdExParameters& bio, const DomainMapping& m,
                           double* current_scale) {
    auto map_v = [&](double v) { return m.voltage_offset + m.voltage_gain * (v - m.voltage_anchor); };
    AdExParameters hw = bio;
    const double tau_m_hw = bio.tau_m() / m.speedup;
    hw.C = m.capacitance;
    hw.g_l = hw.C / tau_m_hw;
    const double g_ratio = hw.g_l / bio.g_l;
    const double i_scale = g_ratio * m.voltage_gain;
    hw.E_l = map_v(bio.E_l);
    hw.V_T = map_v(bio.V_T);
    hw.V_r = map_v(bio.V_r);
    hw.V_det = map_v(bio.V_det);
    hw.Delta_T = bio.Delta_T * m.voltage_gain;
    hw.tau_w = bio.tau_w / m.speedup;
    hw.t_ref = bio.t_ref / m.speedup;
    hw.a = bio.a * g_ratio;
    hw.b = bio.b * i_scale;
    if (current_scale != nullptr) {
        *current_scale = i_scale;
    }
    return hw;
}

double hardware_time_to_bio(double t_hw, const DomainMapping& m) { return t_hw * m.speedup; }
double bio_time_to_hardware(double t_bio, const DomainMapping& m) { return t_bio / m.speedup; }

} // namespace adexsim
