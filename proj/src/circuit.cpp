#include "adexsim/circuit.hpp"

#include "adexsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace adexsim {

double OtaModel::saturation_current() const {
    const double g = transconductance();
    return std::min(I_out_max, g * V_lin / kOtaLinearRangeArgument);
}

double ota_output(const OtaModel& ota, double V_plus, double V_minus) {
    const double g = ota.transconductance();
    const double i_sat = ota.saturation_current();
    if (!(g > 0.0) || !(i_sat > 0.0)) {
        return 0.0;
    }
    return i_sat * std::tanh(g * (V_plus - V_minus) / i_sat);
}

double ota_secant_conductance(const OtaModel& ota, double dV) {
    const double g = ota.transconductance();
    const double i_sat = ota.saturation_current();
    if (!(g > 0.0) || !(i_sat > 0.0)) {
        return 0.0;
    }
    const double x = g * dV / i_sat;
    if (std::abs(x) < 1e-8) {
        return g;
    }
    return g * std::tanh(x) / x;
}

double AdaptationCircuitConfig::a() const {
    const double pol = sign == Polarity::positive ? 1.0 : -1.0;
    return pol * g_a() * g_w() / g_tau();
}

double AdaptationCircuitConfig::b() const { return g_w() * pulse_amplitude * pulse_width / C_w; }

double ExponentialCircuitConfig::delta_t_eff() const {
    return n * V_therm / (8.0 * g_ota() * r_conv);
}

double SynInCircuitConfig::virtual_reversal() const {
    const double shift = I_b_cuba() / g2;
    return sign == SynapseSign::excitatory ? E_syn_hat + shift : E_syn_hat - shift;
}

void CircuitNeuronConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw InvalidConfig(std::string("circuit config: ") + what);
        }
    };
    auto ota_ok = [](const OtaModel& o) {
        return o.I_bias >= 0.0 && o.g_per_bias > 0.0 && o.V_lin > 0.0 && o.I_out_max > 0.0;
    };
    require(C_mem > 0.0 && C_mem <= kMaxMembraneCapacitance * (1.0 + 1e-12),
            "C_mem must lie in (0, C_max]");
    require(ota_ok(leak), "leak OTA constants must be positive");
    require(t_ref >= 0.0, "t_ref must be >= 0");
    if (enables.leak) {
        require(leak.I_bias > 0.0, "leak bias must be > 0 when the leak is enabled");
    }
    if (adaptation.enabled) {
        require(adaptation.C_w > 0.0, "C_w must be > 0");
        require(ota_ok(adaptation.tau_ota) && adaptation.tau_ota.I_bias > 0.0,
                "adaptation tau_w = C_w/g_tau requires a positive tau bias");
        require(ota_ok(adaptation.a_ota), "adaptation coupling OTA constants must be valid");
        require(adaptation.g_w_factor > 0.0, "g_w_factor must be > 0");
        require(adaptation.pulse_width >= 0.0, "pulse_width must be >= 0");
    }
    if (exponential.enabled) {
        require(ota_ok(exponential.ota) && exponential.ota.I_bias > 0.0,
                "exponential OTA bias must be > 0");
        require(exponential.I_0 > 0.0 && exponential.r_conv > 0.0 && exponential.n > 0.0 &&
                    exponential.V_therm > 0.0 && exponential.I_max > 0.0,
                "exponential device constants must be positive");
    }
    for (const SynInCircuitConfig* syn : {&syn_exc, &syn_inh}) {
        if (!syn->enabled) {
            continue;
        }
        require(syn->C_line > 0.0 && syn->g_line_per_bias > 0.0 && syn->I_b_tau > 0.0,
                "synaptic line tau_syn = C_line/g_leak_line must be > 0");
        require(ota_ok(syn->ota1), "synaptic OTA1 constants must be valid");
        require(syn->charge_per_weight >= 0.0, "charge_per_weight must be >= 0");
        if (syn->coba_enabled) {
            require(syn->g2 > 0.0, "conductance mode requires g2 > 0");
        }
    }
}

CircuitState resting_state(const CircuitNeuronConfig& cfg) {
    CircuitState s;
    s.V_m = cfg.E_l;
    s.V_w = cfg.adaptation.V_ref;
    return s;
}

double adaptation_current(double V_w, const AdaptationCircuitConfig& cfg) {
    return cfg.enabled ? cfg.g_w() * (cfg.V_ref - V_w) : 0.0;
}

namespace {

// Coupling current onto C_w from the membrane, and the pulse, both in the
// direction that raises I_w (i.e. discharges C_w).
double adaptation_drive(double V_m, const AdaptationCircuitConfig& cfg, double pulse_current) {
    const double pol = cfg.sign == Polarity::positive ? 1.0 : -1.0;
    return pol * ota_output(cfg.a_ota, V_m, cfg.E_l_adapt) + pulse_current;
}

} // namespace

AdaptationRates adaptation_dynamics(const CircuitState& state, const AdaptationCircuitConfig& cfg,
                                    bool spike_pulse_active) {
    if (!cfg.enabled) {
        return {};
    }
    const double pulse = spike_pulse_active ? cfg.pulse_amplitude : 0.0;
    const double restore = ota_output(cfg.tau_ota, cfg.V_ref, state.V_w);
    AdaptationRates r;
    r.dV_w_dt = (restore - adaptation_drive(state.V_m, cfg, pulse)) / cfg.C_w;
    r.I_w = adaptation_current(state.V_w, cfg);
    return r;
}

double exponential_current(double V_m, const ExponentialCircuitConfig& cfg, bool in_refractory) {
    if (!cfg.enabled || (in_refractory && cfg.gate_in_refractory)) {
        return 0.0;
    }
    const double i_ota = ota_output(cfg.ota, V_m, cfg.V_exp);
    const double arg = 8.0 * i_ota * cfg.r_conv / (cfg.n * cfg.V_therm);
    if (arg < std::log(kExpRectificationFloor)) {
        return 0.0;
    }
    // Beyond ln(I_max/I_0) the output stage is saturated anyway.
    const double ceiling = std::log(cfg.I_max / cfg.I_0);
    if (arg >= ceiling) {
        return cfg.I_max;
    }
    return cfg.I_0 * std::exp(arg);
}

double coba_effective_bias(double V_m, const SynInCircuitConfig& cfg) {
    const double modulation = cfg.sign == SynapseSign::excitatory ? cfg.E_syn_hat - V_m : V_m - cfg.E_syn_hat;
    return std::max(0.0, cfg.I_b_cuba() + cfg.g2 * modulation);
}

double synaptic_input_current(double s, double V_m, const SynInCircuitConfig& cfg) {
    if (!cfg.enabled) {
        return 0.0;
    }
    OtaModel ota1 = cfg.ota1;
    if (cfg.coba_enabled) {
        ota1.I_bias = coba_effective_bias(V_m, cfg);
    }
    const double i = ota_output(ota1, s + cfg.input_offset(), 0.0);
    return cfg.sign == SynapseSign::excitatory ? i : -i;
}

CircuitStepResult circuit_step(const CircuitState& state, const CircuitNeuronConfig& cfg, double I_stim,
                               const SynapticArrivals& arrivals, double dt) {
    if (!(dt > 0.0)) {
        throw InvalidConfig("circuit_step: dt must be > 0");
    }
    CircuitStepResult out;
    CircuitState& next = out.state;

    double s_exc = state.s_exc;
    double s_inh = state.s_inh;
    if (cfg.syn_exc.enabled) {
        s_exc += arrivals.exc * cfg.syn_exc.jump_per_weight();
    }
    if (cfg.syn_inh.enabled) {
        s_inh += arrivals.inh * cfg.syn_inh.jump_per_weight();
    }

    const bool in_ref = state.ref_remaining > 0.0;
    const double ref_part = std::min(state.ref_remaining, dt);
    const double free = dt - ref_part;
    next.ref_remaining = state.ref_remaining - ref_part;

    // Adaptation: OTA_tau acts as a conductance towards V_ref.
    next.V_w = state.V_w;
    next.pulse_remaining = state.pulse_remaining;
    const AdaptationCircuitConfig& ad = cfg.adaptation;
    if (ad.enabled) {
        const double overlap = std::min(state.pulse_remaining, dt);
        next.pulse_remaining = state.pulse_remaining - overlap;
        const double pulse = ad.pulse_amplitude * overlap / dt;
        const double drive = adaptation_drive(state.V_m, ad, pulse);
        const double g = ota_secant_conductance(ad.tau_ota, ad.V_ref - state.V_w);
        if (g > 0.0) {
            const double V_inf = ad.V_ref - drive / g;
            next.V_w = V_inf + (state.V_w - V_inf) * std::exp(-dt * g / ad.C_w);
        } else {
            next.V_w = state.V_w - dt * drive / ad.C_w;
        }
    }

    next.V_m = state.V_m;
    if (free > 0.0) {
        const double V0 = in_ref ? cfg.V_r : state.V_m;
        const double forcing = exponential_current(V0, cfg.exponential, false) -
                               adaptation_current(state.V_w, ad) +
                               synaptic_input_current(s_exc, V0, cfg.syn_exc) +
                               synaptic_input_current(s_inh, V0, cfg.syn_inh) + I_stim;
        const double g = cfg.enables.leak ? ota_secant_conductance(cfg.leak, cfg.E_l - V0) : 0.0;
        if (g > 0.0) {
            const double V_inf = cfg.E_l + forcing / g;
            next.V_m = V_inf + (V0 - V_inf) * std::exp(-free * g / cfg.C_mem);
        } else {
            next.V_m = V0 + free * forcing / cfg.C_mem;
        }
        if (cfg.enables.threshold && next.V_m >= cfg.V_det) {
            next.V_m = cfg.V_r;
            next.ref_remaining = cfg.t_ref;
            next.pulse_remaining = ad.enabled ? ad.pulse_width : 0.0;
            out.spiked = true;
        }
    } else {
        next.V_m = cfg.V_r;
    }

    next.s_exc = cfg.syn_exc.enabled ? s_exc * std::exp(-dt / cfg.syn_exc.tau_syn()) : 0.0;
    next.s_inh = cfg.syn_inh.enabled ? s_inh * std::exp(-dt / cfg.syn_inh.tau_syn()) : 0.0;

    if (!std::isfinite(next.V_m) || !std::isfinite(next.V_w) || !std::isfinite(next.s_exc) ||
        !std::isfinite(next.s_inh)) {
        throw NonFiniteState(0.0, "circuit_step produced a non-finite state");
    }
    return out;
}

SimulationTrace circuit_simulate(const CircuitNeuronConfig& cfg, const StimulusProgram& stimulus,
                                 const WeightedSpikeTrain& exc, const WeightedSpikeTrain& inh,
                                 double duration, double dt, const CircuitSimulationOptions& options) {
    cfg.validate();
    if (!(duration > 0.0) || !(dt > 0.0)) {
        throw InvalidConfig("circuit_simulate: duration and dt must be > 0");
    }
    const auto n_steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
    SimulationTrace trace;
    trace.dt = dt;
    trace.w_quantity = AdaptationQuantity::voltage;
    if (options.record) {
        trace.samples.reserve(n_steps + 1);
    }
    ArrivalCursor exc_cursor(exc, dt);
    ArrivalCursor inh_cursor(inh, dt);
    CircuitState state = options.use_initial ? options.initial : resting_state(cfg);
    for (std::size_t k = 0;; ++k) {
        const SynapticArrivals arrivals{exc_cursor.take(k), inh_cursor.take(k)};
        if (options.record) {
            // Record the line deflection including arrivals at this boundary.
            const double se = state.s_exc + (cfg.syn_exc.enabled ? arrivals.exc * cfg.syn_exc.jump_per_weight() : 0.0);
            const double si = state.s_inh + (cfg.syn_inh.enabled ? arrivals.inh * cfg.syn_inh.jump_per_weight() : 0.0);
            trace.samples.push_back({state.V_m, state.V_w, se, si});
        }
        if (k == n_steps) {
            break;
        }
        const double t = static_cast<double>(k) * dt;
        CircuitStepResult r;
        try {
            r = circuit_step(state, cfg, stimulus.current_at(t), arrivals, dt);
        } catch (const NonFiniteState&) {
            throw NonFiniteState(t, "circuit_simulate: non-finite state");
        }
        state = r.state;
        if (r.spiked) {
            trace.spikes.push_back(static_cast<double>(k + 1) * dt);
        }
    }
    return trace;
}

double effective_tau_w(const CircuitNeuronConfig& cfg) {
    if (!cfg.adaptation.enabled) {
        throw InvalidConfig("tau_w requested but the adaptation circuit is disabled");
    }
    return cfg.adaptation.tau_w();
}

double effective_a(const CircuitNeuronConfig& cfg) {
    if (!cfg.adaptation.enabled) {
        throw InvalidConfig("a requested but the adaptation circuit is disabled");
    }
    return cfg.adaptation.a();
}

double effective_b(const CircuitNeuronConfig& cfg) {
    if (!cfg.adaptation.enabled) {
        throw InvalidConfig("b requested but the adaptation circuit is disabled");
    }
    return cfg.adaptation.b();
}

double effective_delta_t(const CircuitNeuronConfig& cfg) {
    if (!cfg.exponential.enabled) {
        throw InvalidConfig("Delta_T requested but the exponential circuit is disabled");
    }
    return cfg.exponential.delta_t_eff();
}

double effective_v_t(const CircuitNeuronConfig& cfg) {
    if (!cfg.exponential.enabled) {
        throw InvalidConfig("V_T requested but the exponential circuit is disabled");
    }
    const double g_l = cfg.enables.leak ? cfg.leak.transconductance() : 0.0;
    if (!(g_l > 0.0)) {
        throw InvalidConfig("V_T is defined through g_l and needs an enabled leak");
    }
    const double dT = cfg.exponential.delta_t_eff();
    return cfg.exponential.V_exp + dT * std::log(g_l * dT / cfg.exponential.I_0);
}

double effective_tau_syn(const SynInCircuitConfig& syn) {
    if (!syn.enabled) {
        throw InvalidConfig("tau_syn requested but the synaptic input is disabled");
    }
    return syn.tau_syn();
}

AdExParameters derive_effective_adex(const CircuitNeuronConfig& cfg) {
    AdExParameters p;
    p.C = cfg.C_mem;
    p.g_l = cfg.enables.leak ? cfg.leak.transconductance() : 0.0;
    p.E_l = cfg.E_l;
    p.V_r = cfg.V_r;
    p.V_det = cfg.enables.threshold ? cfg.V_det : std::numeric_limits<double>::max();
    p.t_ref = cfg.t_ref;
    const auto& ad = cfg.adaptation;
    if (ad.enabled) {
        p.tau_w = ad.tau_w();
        p.a = ad.a();
        p.b = ad.b();
    } else {
        p.tau_w = ad.g_tau() > 0.0 ? ad.tau_w() : 1.0;
        p.a = 0.0;
        p.b = 0.0;
    }
    p.exp_enabled = cfg.exponential.enabled;
    p.exp_gated_in_ref = cfg.exponential.gate_in_refractory;
    if (cfg.exponential.enabled) {
        p.Delta_T = effective_delta_t(cfg);
        p.V_T = effective_v_t(cfg);
    } else if (cfg.exponential.g_ota() > 0.0) {
        p.Delta_T = cfg.exponential.delta_t_eff();
    }
    return p;
}

SynapseConfig equivalent_synapse(const SynInCircuitConfig& syn) {
    SynapseConfig s;
    s.tau_syn = syn.tau_syn();
    s.sign = syn.sign;
    const double jump = syn.jump_per_weight();
    if (syn.coba_enabled) {
        s.mode = SynapseMode::coba;
        const double g_hat = syn.ota1.g_per_bias * syn.g2 * jump;
        s.g_hat = g_hat;
        s.E_syn = syn.virtual_reversal();
    } else {
        s.mode = SynapseMode::cuba;
        s.I_hat = syn.ota1.transconductance() * jump;
    }
    return s;
}

SynInCircuitConfig synapse_circuit_for(const SynapseConfig& s, SynInCircuitConfig base) {
    s.validate();
    base.enabled = true;
    base.sign = s.sign;
    base.I_b_tau = base.C_line / (s.tau_syn * base.g_line_per_bias);
    const double jump = base.jump_per_weight();
    if (s.mode == SynapseMode::coba) {
        if (!(s.g_hat > 0.0)) {
            throw InvalidConfig("synapse: conductance mode needs g_hat > 0");
        }
        base.coba_enabled = true;
        base.g2 = s.g_hat / (base.ota1.g_per_bias * jump);
        const double shift = base.I_b_cuba() / base.g2;
        base.E_syn_hat = s.sign == SynapseSign::excitatory ? s.E_syn - shift : s.E_syn + shift;
    } else {
        if (!(s.I_hat > 0.0)) {
            throw InvalidConfig("synapse: current mode needs I_hat > 0");
        }
        base.coba_enabled = false;
        base.ota1.I_bias = s.I_hat / (base.ota1.g_per_bias * jump);
    }
    return base;
}

CircuitNeuronConfig nominal_circuit() {
    CircuitNeuronConfig c;
    c.C_mem = kMaxMembraneCapacitance;
    c.leak = OtaModel{24.7e-9, 5.0, 1.0, 10e-6};
    c.E_l = 0.3;
    c.V_det = 0.7;
    c.V_r = 0.3;
    c.t_ref = 0.0;

    c.adaptation.C_w = 8e-12;
    c.adaptation.tau_ota = OtaModel{16e-9, 5.0, 0.4, 10e-6};
    c.adaptation.a_ota = OtaModel{0.0, 5.0, 1.0, 10e-6};
    c.adaptation.g_w_factor = 12.0;
    c.adaptation.V_ref = 0.8;
    c.adaptation.E_l_adapt = c.E_l;
    c.adaptation.pulse_width = 0.2e-6;
    c.adaptation.enabled = false;

    c.exponential.I_0 = 1e-9;
    c.exponential.ota = OtaModel{48.5e-9, 5.0, 1.0, 10e-6};
    c.exponential.r_conv = 1e6;
    c.exponential.n = 1.5;
    c.exponential.V_therm = 25.85e-3;
    c.exponential.V_exp = 0.48;
    c.exponential.I_max = 5e-6;
    c.exponential.enabled = false;

    SynInCircuitConfig syn;
    syn.C_line = 1e-12;
    syn.I_b_tau = 10e-9;
    syn.g_line_per_bias = 20.0;
    syn.ota1 = OtaModel{0.5e-6, 20.0, 0.2, 10e-6};
    syn.g2 = 1e-6;
    syn.E_syn_hat = 0.6;
    syn.follower_drop_a = 0.3;
    syn.follower_drop_b = 0.3;
    syn.charge_per_weight = 10e-15;
    syn.enabled = false;
    c.syn_exc = syn;
    c.syn_inh = syn;
    c.syn_inh.sign = SynapseSign::inhibitory;
    c.syn_inh.E_syn_hat = 0.2;
    return c;
}

CircuitNeuronConfig ideal_equivalent_circuit(const AdExParameters& p, const CircuitNeuronConfig& base) {
    p.validate();
    if (p.C > kMaxMembraneCapacitance * (1.0 + 1e-12)) {
        throw InvalidConfig("membrane capacitance exceeds the selectable maximum");
    }
    CircuitNeuronConfig c = base;
    c.C_mem = p.C;
    c.enables.leak = p.g_l > 0.0;
    c.leak.I_bias = p.g_l / c.leak.g_per_bias;
    c.E_l = p.E_l;
    c.V_r = p.V_r;
    c.V_det = p.V_det;
    c.t_ref = p.t_ref;

    auto& ad = c.adaptation;
    ad.enabled = p.a != 0.0 || p.b != 0.0;
    ad.E_l_adapt = p.E_l;
    const double g_tau = ad.C_w / p.tau_w;
    ad.tau_ota.I_bias = g_tau / ad.tau_ota.g_per_bias;
    ad.sign = p.a < 0.0 ? Polarity::negative : Polarity::positive;
    ad.a_ota.I_bias = std::abs(p.a) / ad.g_w_factor / ad.a_ota.g_per_bias;
    ad.pulse_amplitude = p.b * ad.C_w / (ad.g_w() * ad.pulse_width);

    auto& ex = c.exponential;
    ex.enabled = p.exp_enabled;
    ex.gate_in_refractory = p.exp_gated_in_ref;
    if (p.exp_enabled) {
        const double g_ota = ex.n * ex.V_therm / (8.0 * ex.r_conv * p.Delta_T);
        ex.ota.I_bias = g_ota / ex.ota.g_per_bias;
        ex.V_exp = p.V_T - p.Delta_T * std::log(p.g_l * p.Delta_T / ex.I_0);
    }
    return c;
}

namespace {

using CfgRef = std::function<double&(CircuitNeuronConfig&)>;

struct NamedField {
    std::string name;
    CfgRef ref;
};

std::vector<NamedField> make_device_fields() {
    std::vector<NamedField> f = {
        {"leak.g_per_bias", [](CircuitNeuronConfig& c) -> double& { return c.leak.g_per_bias; }},
        {"adaptation.g_tau_per_bias", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.tau_ota.g_per_bias; }},
        {"adaptation.g_a_per_bias", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.a_ota.g_per_bias; }},
        {"adaptation.g_w_factor", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.g_w_factor; }},
        {"adaptation.C_w", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.C_w; }},
        {"exponential.g_per_bias", [](CircuitNeuronConfig& c) -> double& { return c.exponential.ota.g_per_bias; }},
        {"exponential.I_0", [](CircuitNeuronConfig& c) -> double& { return c.exponential.I_0; }},
        {"exponential.r_conv", [](CircuitNeuronConfig& c) -> double& { return c.exponential.r_conv; }},
    };
    for (const char* side : {"syn_exc", "syn_inh"}) {
        const bool exc = std::string_view(side) == "syn_exc";
        auto syn = [exc](CircuitNeuronConfig& c) -> SynInCircuitConfig& { return exc ? c.syn_exc : c.syn_inh; };
        const std::string p(side);
        f.push_back({p + ".g_line_per_bias", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).g_line_per_bias; }});
        f.push_back({p + ".g1_per_bias", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).ota1.g_per_bias; }});
        f.push_back({p + ".follower_drop_a", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).follower_drop_a; }});
        f.push_back({p + ".follower_drop_b", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).follower_drop_b; }});
    }
    return f;
}

std::vector<NamedField> make_bias_fields() {
    std::vector<NamedField> f = {
        {"leak.I_bias", [](CircuitNeuronConfig& c) -> double& { return c.leak.I_bias; }},
        {"E_l", [](CircuitNeuronConfig& c) -> double& { return c.E_l; }},
        {"V_det", [](CircuitNeuronConfig& c) -> double& { return c.V_det; }},
        {"V_r", [](CircuitNeuronConfig& c) -> double& { return c.V_r; }},
        {"adaptation.I_b_tau", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.tau_ota.I_bias; }},
        {"adaptation.I_b_a", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.a_ota.I_bias; }},
        {"adaptation.pulse_amplitude", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.pulse_amplitude; }},
        {"adaptation.V_ref", [](CircuitNeuronConfig& c) -> double& { return c.adaptation.V_ref; }},
        {"exponential.I_bias", [](CircuitNeuronConfig& c) -> double& { return c.exponential.ota.I_bias; }},
        {"exponential.V_exp", [](CircuitNeuronConfig& c) -> double& { return c.exponential.V_exp; }},
    };
    for (const char* side : {"syn_exc", "syn_inh"}) {
        const bool exc = std::string_view(side) == "syn_exc";
        auto syn = [exc](CircuitNeuronConfig& c) -> SynInCircuitConfig& { return exc ? c.syn_exc : c.syn_inh; };
        const std::string p(side);
        f.push_back({p + ".I_b_tau", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).I_b_tau; }});
        f.push_back({p + ".I_b_cuba", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).ota1.I_bias; }});
        f.push_back({p + ".follower_offset", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).follower_offset; }});
        f.push_back({p + ".E_syn_hat", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).E_syn_hat; }});
        f.push_back({p + ".g2", [syn](CircuitNeuronConfig& c) -> double& { return syn(c).g2; }});
    }
    return f;
}

const std::vector<NamedField>& device_fields() {
    static const std::vector<NamedField> f = make_device_fields();
    return f;
}

const std::vector<NamedField>& bias_fields() {
    static const std::vector<NamedField> f = make_bias_fields();
    return f;
}

std::vector<std::string> names_of(const std::vector<NamedField>& fields) {
    std::vector<std::string> out;
    for (const auto& f : fields) {
        out.push_back(f.name);
    }
    return out;
}

double& lookup(const std::vector<NamedField>& fields, CircuitNeuronConfig& cfg, std::string_view name,
               const char* kind) {
    for (const auto& f : fields) {
        if (f.name == name) {
            return f.ref(cfg);
        }
    }
    throw InvalidConfig(std::string("unknown ") + kind + " '" + std::string(name) + "'");
}

} // namespace

const std::vector<std::string>& device_constant_names() {
    static const std::vector<std::string> n = names_of(device_fields());
    return n;
}

double& device_constant(CircuitNeuronConfig& cfg, std::string_view name) {
    return lookup(device_fields(), cfg, name, "device constant");
}

const std::vector<std::string>& bias_names() {
    static const std::vector<std::string> n = names_of(bias_fields());
    return n;
}

double& bias(CircuitNeuronConfig& cfg, std::string_view name) {
    return lookup(bias_fields(), cfg, name, "bias");
}

double bias(const CircuitNeuronConfig& cfg, std::string_view name) {
    CircuitNeuronConfig copy = cfg;
    return bias(copy, name);
}

} // namespace adexsim
