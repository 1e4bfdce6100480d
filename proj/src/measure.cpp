#include "adexsim/measure.hpp"

#include "adexsim/error.hpp"
#include "adexsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace adexsim {

namespace {

constexpr double kNoThreshold = 1e3; // V, far above any reachable potential

template <class Get>
ExponentialFit fit_release(const SimulationTrace& tr, Get get, double target, std::size_t first,
                           double min_r_squared, const char* what) {
    std::vector<double> t;
    std::vector<double> y;
    for (std::size_t k = first; k < tr.samples.size(); ++k) {
        t.push_back(tr.time_of(k));
        y.push_back(get(tr.samples[k]) - target);
    }
    const ExponentialFit fit = fit_exponential_decay(t, y);
    if (fit.r_squared < min_r_squared) {
        throw FitFailed(std::string(what) + ": release is not a single exponential (R^2 = " +
                        std::to_string(fit.r_squared) + ")");
    }
    return fit;
}

CircuitNeuronConfig isolated_membrane(const CircuitNeuronConfig& neuron) {
    CircuitNeuronConfig c = neuron;
    c.adaptation.enabled = false;
    c.exponential.enabled = false;
    c.syn_exc.enabled = false;
    c.syn_inh.enabled = false;
    c.enables.threshold = false;
    return c;
}

AdExParameters passive(const AdExParameters& p) {
    AdExParameters q = p;
    q.exp_enabled = false;
    q.a = 0.0;
    q.b = 0.0;
    q.t_ref = 0.0;
    q.V_det = q.E_l + kNoThreshold;
    return q;
}

void require_offset(double offset) {
    if (offset == 0.0 || !std::isfinite(offset)) {
        throw FitFailed("release measurement: zero offset leaves nothing to fit");
    }
}

} // namespace

double measure_tau_m(const CircuitNeuronConfig& neuron, const ReleaseProtocol& protocol) {
    require_offset(protocol.offset);
    CircuitNeuronConfig c = isolated_membrane(neuron);
    if (!c.enables.leak || !(c.leak.transconductance() > 0.0)) {
        throw FitFailed("measure_tau_m: leak is disabled");
    }
    const double hint = c.tau_m();
    CircuitSimulationOptions opt;
    opt.use_initial = true;
    opt.initial = resting_state(c);
    opt.initial.V_m = c.E_l + protocol.offset;
    const auto tr = circuit_simulate(c, StimulusProgram{}, {}, {}, protocol.window_in_tau * hint,
                                     hint / protocol.steps_per_tau, opt);
    return fit_release(tr, [](const TraceSample& s) { return s.V; }, c.E_l, 0, protocol.min_r_squared,
                       "measure_tau_m")
        .tau;
}

double measure_tau_m(const AdExParameters& p, const ReleaseProtocol& protocol) {
    require_offset(protocol.offset);
    const AdExParameters q = passive(p);
    const double hint = q.tau_m();
    SimulationOptions opt;
    opt.use_initial = true;
    opt.initial = {q.E_l + protocol.offset, 0.0, 0.0};
    const auto tr = simulate(q, StimulusProgram{}, {}, protocol.window_in_tau * hint,
                             hint / protocol.steps_per_tau, opt);
    return fit_release(tr, [](const TraceSample& s) { return s.V; }, q.E_l, 0, protocol.min_r_squared,
                       "measure_tau_m")
        .tau;
}

double measure_tau_w(const CircuitNeuronConfig& neuron, const ReleaseProtocol& protocol) {
    require_offset(protocol.offset);
    if (!neuron.adaptation.enabled) {
        throw InvalidConfig("measure_tau_w: adaptation circuit is disabled");
    }
    CircuitNeuronConfig c = isolated_membrane(neuron);
    c.adaptation = neuron.adaptation;
    c.adaptation.a_ota.I_bias = 0.0;
    c.adaptation.pulse_amplitude = 0.0;
    const double hint = c.adaptation.tau_w();
    CircuitSimulationOptions opt;
    opt.use_initial = true;
    opt.initial = resting_state(c);
    opt.initial.V_w = c.adaptation.V_ref - protocol.offset;
    const auto tr = circuit_simulate(c, StimulusProgram{}, {}, {}, protocol.window_in_tau * hint,
                                     hint / protocol.steps_per_tau, opt);
    return fit_release(tr, [](const TraceSample& s) { return s.w; }, c.adaptation.V_ref, 0,
                       protocol.min_r_squared, "measure_tau_w")
        .tau;
}

double measure_tau_w(const AdExParameters& p, const ReleaseProtocol& protocol) {
    require_offset(protocol.offset);
    const AdExParameters q = passive(p);
    const double hint = q.tau_w;
    SimulationOptions opt;
    opt.use_initial = true;
    // offset read as amperes of w per volt of leak: w0 = g_l * offset
    opt.initial = {q.E_l, q.g_l * protocol.offset, 0.0};
    const auto tr = simulate(q, StimulusProgram{}, {}, protocol.window_in_tau * hint,
                             hint / protocol.steps_per_tau, opt);
    return fit_release(tr, [](const TraceSample& s) { return s.w; }, 0.0, 0, protocol.min_r_squared,
                       "measure_tau_w")
        .tau;
}

double measure_subthreshold_a(const CircuitNeuronConfig& neuron, const StepResponseProtocol& protocol) {
    CircuitNeuronConfig c = isolated_membrane(neuron);
    c.adaptation = neuron.adaptation;
    c.adaptation.pulse_amplitude = 0.0;
    c.leak.I_bias *= protocol.leak_boost;
    const double g0 = c.leak.transconductance();
    if (!c.enables.leak || !(g0 > 0.0)) {
        throw FitFailed("measure_subthreshold_a: leak is disabled");
    }
    const double I = g0 * protocol.deflection;
    double slow = c.tau_m();
    double fast = c.tau_m();
    if (c.adaptation.enabled) {
        slow = std::max(slow, c.adaptation.tau_w());
        fast = std::min(fast, c.adaptation.tau_w());
    }
    const double T = protocol.settle_in_tau * slow;
    const double dt = std::min(fast / protocol.steps_per_tau, slow / 400.0);

    auto settled = [&](const CircuitNeuronConfig& cfg, double current) {
        const auto tr = circuit_simulate(cfg, StimulusProgram::constant(current), {}, {}, T, dt);
        return tr.samples.back().V;
    };
    const double dV = settled(c, I) - settled(c, 0.0);
    CircuitNeuronConfig uncoupled = c;
    uncoupled.adaptation.a_ota.I_bias = 0.0;
    const double dV0 = settled(uncoupled, I) - settled(uncoupled, 0.0);
    if (!(dV > 0.0) || !(dV0 > 0.0)) {
        throw FitFailed("measure_subthreshold_a: step response did not settle above rest");
    }
    return I / dV - I / dV0;
}

double measure_subthreshold_a(const AdExParameters& p, const StepResponseProtocol& protocol) {
    AdExParameters q = p;
    q.exp_enabled = false;
    q.b = 0.0;
    q.V_det = q.E_l + kNoThreshold;
    q.g_l *= protocol.leak_boost;
    const double I = q.g_l * protocol.deflection;
    const double slow = std::max(q.tau_m(), q.tau_w);
    const double fast = std::min(q.tau_m(), q.tau_w);
    const double T = protocol.settle_in_tau * slow;
    const double dt = std::min(fast / protocol.steps_per_tau, slow / 400.0);
    auto settled = [&](const AdExParameters& params, double current) {
        const auto tr = simulate(params, StimulusProgram::constant(current), {}, T, dt);
        return tr.samples.back().V;
    };
    const double dV = settled(q, I) - settled(q, 0.0);
    AdExParameters uncoupled = q;
    uncoupled.a = 0.0;
    const double dV0 = settled(uncoupled, I) - settled(uncoupled, 0.0);
    if (!(dV > 0.0) || !(dV0 > 0.0)) {
        throw FitFailed("measure_subthreshold_a: step response did not settle above rest");
    }
    return I / dV - I / dV0;
}

double measure_b(const CircuitNeuronConfig& neuron) {
    if (!neuron.adaptation.enabled) {
        throw InvalidConfig("measure_b: adaptation circuit is disabled");
    }
    CircuitNeuronConfig c = isolated_membrane(neuron);
    c.adaptation = neuron.adaptation;
    c.adaptation.a_ota.I_bias = 0.0;
    const auto& ad = c.adaptation;
    if (ad.pulse_amplitude == 0.0 || ad.pulse_width == 0.0) {
        return 0.0;
    }
    // Pulse at fine resolution, then the free decay at a coarse one.
    CircuitSimulationOptions opt;
    opt.use_initial = true;
    opt.initial = resting_state(c);
    opt.initial.pulse_remaining = ad.pulse_width;
    const auto pulse = circuit_simulate(c, StimulusProgram{}, {}, {}, ad.pulse_width, ad.pulse_width / 20.0, opt);
    opt.initial.V_m = pulse.samples.back().V;
    opt.initial.V_w = pulse.samples.back().w;
    opt.initial.pulse_remaining = 0.0;
    const double hint = ad.tau_w();
    const auto decay = circuit_simulate(c, StimulusProgram{}, {}, {}, 3.0 * hint, hint / 400.0, opt);
    std::vector<double> t;
    std::vector<double> y;
    const double t_mid = 0.5 * ad.pulse_width;
    for (std::size_t k = 0; k < decay.samples.size(); ++k) {
        t.push_back(ad.pulse_width + decay.time_of(k) - t_mid);
        y.push_back(adaptation_current(decay.samples[k].w, ad));
    }
    return fit_exponential_decay(t, y).amplitude;
}

namespace {

template <class Current>
ExponentialMeasurement exponential_fit(Current current, double center, double lo_current, double hi_current,
                                       double g_l, const ExponentialSweep& sweep) {
    std::vector<double> v;
    std::vector<double> log_i;
    double i_min = INFINITY;
    double i_max = 0.0;
    // March outwards from the onset until the window is left on both sides.
    const auto n = static_cast<long>(std::ceil(sweep.span / sweep.step));
    for (int dir : {-1, 1}) {
        for (long k = dir < 0 ? 0 : 1; k <= n; ++k) {
            const double V = center + dir * static_cast<double>(k) * sweep.step;
            const double i = current(V);
            if (dir < 0 ? i < lo_current : i > hi_current) {
                break;
            }
            if (i >= lo_current && i <= hi_current) {
                v.push_back(V);
                log_i.push_back(std::log(i));
                i_min = std::min(i_min, i);
                i_max = std::max(i_max, i);
            }
        }
    }
    ExponentialMeasurement m;
    m.decades = v.size() >= 2 ? std::log10(i_max / i_min) : 0.0;
    if (m.decades < sweep.decades * (1.0 - 1e-3)) {
        throw FitFailed("measure_exponential: only " + std::to_string(m.decades) +
                        " decades below saturation");
    }
    const LinearFit line = fit_line(v, log_i);
    if (!(line.slope > 0.0)) {
        throw FitFailed("measure_exponential: current does not grow with V");
    }
    m.delta_t = 1.0 / line.slope;
    m.v_t = (std::log(g_l * m.delta_t) - line.intercept) / line.slope;
    m.r_squared = line.r_squared;
    return m;
}

} // namespace

ExponentialMeasurement measure_exponential(const CircuitNeuronConfig& neuron, double g_l,
                                           const ExponentialSweep& sweep) {
    const auto& ex = neuron.exponential;
    if (!ex.enabled) {
        throw InvalidConfig("measure_exponential: exponential circuit is disabled");
    }
    // The fitted window ends one decade below the output ceiling.
    const double hi = ex.I_max / 10.0;
    const double lo = hi * std::pow(10.0, -(sweep.decades + 0.25));
    return exponential_fit([&](double V) { return exponential_current(V, ex, false); }, ex.V_exp, lo, hi, g_l,
                           sweep);
}

ExponentialMeasurement measure_exponential(const AdExParameters& p, const ExponentialSweep& sweep) {
    if (!p.exp_enabled) {
        throw InvalidConfig("measure_exponential: exponential term is disabled");
    }
    const double ref = p.g_l * p.Delta_T;
    const double hi = ref * 10.0;
    const double lo = hi * std::pow(10.0, -(sweep.decades + 0.25));
    return exponential_fit([&](double V) { return exponential_current(NeuronState{V, 0.0, 0.0}, p); }, p.V_T,
                           lo, hi, p.g_l, sweep);
}

namespace {

const SynInCircuitConfig& side_of(const CircuitNeuronConfig& c, SynapseSign side) {
    return side == SynapseSign::excitatory ? c.syn_exc : c.syn_inh;
}

} // namespace

double measure_tau_syn(const CircuitNeuronConfig& neuron, SynapseSign side) {
    const auto& syn = side_of(neuron, side);
    if (!syn.enabled) {
        throw InvalidConfig("measure_tau_syn: synaptic input is disabled");
    }
    CircuitNeuronConfig c = isolated_membrane(neuron);
    (side == SynapseSign::excitatory ? c.syn_exc : c.syn_inh) = syn;
    const double hint = syn.tau_syn();
    const WeightedSpikeTrain train({{0.0, 1.0}});
    const WeightedSpikeTrain none;
    const bool exc = side == SynapseSign::excitatory;
    const auto tr = circuit_simulate(c, StimulusProgram{}, exc ? train : none, exc ? none : train, 4.0 * hint,
                                     hint / 400.0);
    return fit_release(tr, [exc](const TraceSample& s) { return exc ? s.s_exc : s.s_inh; }, 0.0, 0, 0.99,
                       "measure_tau_syn")
        .tau;
}

double measure_psp_amplitude(const CircuitNeuronConfig& neuron, SynapseSign side) {
    const auto& syn = side_of(neuron, side);
    if (!syn.enabled) {
        throw InvalidConfig("measure_psp_amplitude: synaptic input is disabled");
    }
    CircuitNeuronConfig c = isolated_membrane(neuron);
    c.syn_exc = neuron.syn_exc;
    c.syn_inh = neuron.syn_inh;
    const double tau_m = c.tau_m();
    const double tau_s = syn.tau_syn();
    const double dt = std::min(tau_m, tau_s) / 200.0;
    const double t0 = 20.0 * dt;
    // Start from the actual resting point so the baseline is flat.
    CircuitSimulationOptions opt;
    opt.use_initial = true;
    opt.initial = resting_state(c);
    opt.initial.V_m = measure_resting_potential(neuron);
    const WeightedSpikeTrain train({{t0, 1.0}});
    const WeightedSpikeTrain none;
    const bool exc = side == SynapseSign::excitatory;
    const auto tr = circuit_simulate(c, StimulusProgram{}, exc ? train : none, exc ? none : train,
                                     t0 + 8.0 * std::max(tau_m, tau_s), dt, opt);
    return psp_metrics(tr, t0).amplitude;
}

double measure_psp_amplitude(const AdExParameters& p, const SynapseConfig& syn) {
    const AdExParameters q = passive(p);
    const double dt = std::min(q.tau_m(), syn.tau_syn) / 200.0;
    const double t0 = 20.0 * dt;
    const SynapticInput input{syn, WeightedSpikeTrain({{t0, 1.0}})};
    const auto tr = simulate(q, StimulusProgram{}, std::span<const SynapticInput>(&input, 1),
                             t0 + 8.0 * std::max(q.tau_m(), syn.tau_syn), dt);
    return psp_metrics(tr, t0).amplitude;
}

double measure_resting_potential(const CircuitNeuronConfig& neuron) {
    CircuitNeuronConfig c = isolated_membrane(neuron);
    c.syn_exc = neuron.syn_exc;
    c.syn_inh = neuron.syn_inh;
    if (!c.enables.leak || !(c.leak.transconductance() > 0.0)) {
        throw FitFailed("measure_resting_potential: leak is disabled");
    }
    const double tau = c.tau_m();
    const auto tr = circuit_simulate(c, StimulusProgram{}, {}, {}, 30.0 * tau, tau / 20.0);
    return tr.samples.back().V;
}

} // namespace adexsim
