#include "adexsim/calibration.hpp"

#include "adexsim/error.hpp"
#include "adexsim/measure.hpp"
#include "adexsim/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace adexsim {

namespace {

struct Evaluation {
    double x;  // search coordinate
    double bias;
    double measured;
    double g;  // measured - target
};

} // namespace

ParameterCalibration calibrate_parameter(CircuitNeuronConfig& neuron, double target, std::string_view bias_name,
                                         const MeasureFn& measure, BiasBounds bounds, double tol,
                                         int max_iter) {
    if (!(bounds.lo < bounds.hi)) {
        throw InvalidConfig("calibrate_parameter: bounds must satisfy lo < hi");
    }
    if (target == 0.0 || !std::isfinite(target)) {
        throw InvalidConfig("calibrate_parameter: target must be finite and non-zero");
    }
    const bool log_space = bounds.lo > 0.0 || bounds.hi < 0.0;
    const double sgn = bounds.hi < 0.0 ? -1.0 : 1.0;
    auto to_x = [&](double b) { return log_space ? std::log(sgn * b) : b; };
    auto to_bias = [&](double x) { return log_space ? sgn * std::exp(x) : x; };
    auto residual = [&](double m) { return std::abs(m - target) / std::abs(target); };

    double& knob = bias(neuron, bias_name);
    ParameterCalibration best;
    best.residual = INFINITY;
    int iterations = 0;
    auto evaluate = [&](double b) {
        knob = b;
        double m = 0.0;
        try {
            m = measure(neuron);
        } catch (...) {
            if (std::isfinite(best.residual)) {
                knob = best.bias;
            }
            throw;
        }
        ++iterations;
        if (!std::isfinite(m)) {
            throw FitFailed("calibrate_parameter: measurement of '" + std::string(bias_name) + "' is not finite");
        }
        if (residual(m) < best.residual) {
            best = {b, m, residual(m), 0};
        }
        return Evaluation{to_x(b), b, m, m - target};
    };
    auto finish = [&]() {
        knob = best.bias;
        best.iterations = iterations;
        return best;
    };
    auto give_up = [&](const std::string& why) {
        finish();
        throw NotConverged("calibrate_parameter '" + std::string(bias_name) + "': " + why, best.bias,
                           best.residual);
    };

    const double start = knob;
    const Evaluation e0 = evaluate(start);
    if (best.residual <= tol) {
        return finish();
    }

    const double x_lo = to_x(bounds.lo);
    const double x_hi = to_x(bounds.hi);
    const Evaluation lo = evaluate(bounds.lo);
    const Evaluation mid = evaluate(to_bias(0.5 * (x_lo + x_hi)));
    const Evaluation hi = evaluate(bounds.hi);
    const double d1 = mid.measured - lo.measured;
    const double d2 = hi.measured - mid.measured;
    if (!(d1 * d2 > 0.0)) {
        finish();
        throw NotMonotone("calibrate_parameter '" + std::string(bias_name) +
                          "': measured value is not monotone over the bias bounds");
    }
    if (best.residual <= tol) {
        return finish();
    }
    if (lo.g * hi.g > 0.0) {
        give_up("target outside the reachable range");
    }

    Evaluation a = lo.g * mid.g <= 0.0 ? lo : mid;
    Evaluation b = lo.g * mid.g <= 0.0 ? mid : hi;
    // The starting point narrows the bracket when it lies inside it.
    const double x0 = to_x(start);
    if (x0 > a.x && x0 < b.x) {
        (e0.g * a.g <= 0.0 ? b : a) = e0;
    }

    int side = 0;
    double ga = a.g;
    double gb = b.g;
    while (iterations < max_iter) {
        double x = (a.x * gb - b.x * ga) / (gb - ga);
        if (!(x > std::min(a.x, b.x) && x < std::max(a.x, b.x))) {
            x = 0.5 * (a.x + b.x);
        }
        const Evaluation e = evaluate(to_bias(x));
        if (best.residual <= tol) {
            return finish();
        }
        if (e.g * ga < 0.0) {
            b = e;
            gb = e.g;
            if (side == -1) {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = e;
            ga = e.g;
            if (side == +1) {
                gb *= 0.5;
            }
            side = +1;
        }
    }
    give_up("no convergence within " + std::to_string(max_iter) + " measurements");
    return best;  // unreachable
}

namespace {

constexpr CalibratedQuantity kOrder[] = {
    CalibratedQuantity::tau_syn, CalibratedQuantity::tau_m, CalibratedQuantity::offset,
    CalibratedQuantity::delta_t, CalibratedQuantity::v_t,   CalibratedQuantity::tau_w,
    CalibratedQuantity::a,       CalibratedQuantity::b,     CalibratedQuantity::psp_amplitude,
};

struct Spec {
    const char* bias;
    BiasBounds bounds;
};

Spec spec_of(CalibratedQuantity q) {
    switch (q) {
    case CalibratedQuantity::tau_syn: return {"syn_exc.I_b_tau", {50e-12, 500e-9}};
    case CalibratedQuantity::tau_m: return {"leak.I_bias", {0.2e-9, 2e-6}};
    case CalibratedQuantity::offset: return {"syn_exc.follower_offset", {-0.1, 0.1}};
    case CalibratedQuantity::delta_t: return {"exponential.I_bias", {8e-9, 400e-9}};
    case CalibratedQuantity::v_t: return {"exponential.V_exp", {-0.5, 1.5}};
    case CalibratedQuantity::tau_w: return {"adaptation.I_b_tau", {0.5e-9, 0.5e-6}};
    case CalibratedQuantity::a: return {"adaptation.I_b_a", {1e-12, 1e-6}};
    case CalibratedQuantity::b: return {"adaptation.pulse_amplitude", {1e-12, 1e-5}};
    case CalibratedQuantity::psp_amplitude: return {"syn_exc.I_b_cuba", {1e-9, 5e-6}};
    }
    throw InvalidConfig("unknown calibrated quantity");
}

std::optional<double> target_of(const CalibrationTarget& t, CalibratedQuantity q, const CircuitNeuronConfig& n) {
    switch (q) {
    case CalibratedQuantity::tau_syn: return t.tau_syn;
    case CalibratedQuantity::tau_m: return t.tau_m;
    case CalibratedQuantity::offset: return n.E_l;
    case CalibratedQuantity::delta_t: return t.delta_t;
    case CalibratedQuantity::v_t: return t.v_t;
    case CalibratedQuantity::tau_w: return t.tau_w;
    case CalibratedQuantity::a: return t.a;
    case CalibratedQuantity::b: return t.b;
    case CalibratedQuantity::psp_amplitude: return t.psp_amplitude;
    }
    return std::nullopt;
}

// Leak conductance as seen from the outside: C_mem over the measured tau_m.
double measured_g_l(const CircuitNeuronConfig& n) { return n.C_mem / measure_tau_m(n); }

CircuitNeuronConfig only_side(const CircuitNeuronConfig& n, SynapseSign side) {
    CircuitNeuronConfig c = n;
    (side == SynapseSign::excitatory ? c.syn_inh : c.syn_exc).enabled = false;
    return c;
}

double measure_quantity(CalibratedQuantity q, const CircuitNeuronConfig& n, double g_l, SynapseSign side) {
    switch (q) {
    case CalibratedQuantity::tau_syn: return measure_tau_syn(n);
    case CalibratedQuantity::tau_m: return measure_tau_m(n);
    case CalibratedQuantity::offset: return measure_resting_potential(only_side(n, side));
    case CalibratedQuantity::delta_t: return measure_exponential(n, g_l).delta_t;
    case CalibratedQuantity::v_t: return measure_exponential(n, g_l).v_t;
    case CalibratedQuantity::tau_w: return measure_tau_w(n);
    case CalibratedQuantity::a: return measure_subthreshold_a(n);
    case CalibratedQuantity::b: return measure_b(n);
    case CalibratedQuantity::psp_amplitude: return measure_psp_amplitude(n);
    }
    throw InvalidConfig("unknown calibrated quantity");
}

void enable_for(CircuitNeuronConfig& n, CalibratedQuantity q) {
    switch (q) {
    case CalibratedQuantity::tau_syn:
    case CalibratedQuantity::psp_amplitude: n.syn_exc.enabled = true; break;
    case CalibratedQuantity::delta_t:
    case CalibratedQuantity::v_t: n.exponential.enabled = true; break;
    case CalibratedQuantity::tau_w:
    case CalibratedQuantity::a:
    case CalibratedQuantity::b: n.adaptation.enabled = true; break;
    default: break;
    }
}

double tolerance_for(CalibratedQuantity q, const CalibrationOptions& options) {
    return q == CalibratedQuantity::offset || q == CalibratedQuantity::v_t ? options.potential_tol : options.tol;
}

double relative_residual(double measured, double target) {
    if (target == 0.0) {
        return measured == 0.0 ? 0.0 : INFINITY;
    }
    return std::abs(measured - target) / std::abs(target);
}

struct Step {
    CalibratedQuantity quantity;
    SynapseSign side;
    std::string bias_name;
    BiasBounds bounds;
};

std::vector<Step> expand(const std::vector<CalibratedQuantity>& plan, const CircuitNeuronConfig& n) {
    std::vector<Step> steps;
    for (CalibratedQuantity q : plan) {
        const Spec s = spec_of(q);
        if (q == CalibratedQuantity::offset) {
            if (n.syn_exc.enabled) {
                steps.push_back({q, SynapseSign::excitatory, "syn_exc.follower_offset", s.bounds});
            }
            if (n.syn_inh.enabled) {
                steps.push_back({q, SynapseSign::inhibitory, "syn_inh.follower_offset", s.bounds});
            }
            continue;
        }
        steps.push_back({q, SynapseSign::excitatory, s.bias, s.bounds});
    }
    return steps;
}

} // namespace

std::string_view quantity_name(CalibratedQuantity q) {
    switch (q) {
    case CalibratedQuantity::tau_syn: return "tau_syn";
    case CalibratedQuantity::tau_m: return "tau_m";
    case CalibratedQuantity::offset: return "offset";
    case CalibratedQuantity::delta_t: return "delta_t";
    case CalibratedQuantity::v_t: return "v_t";
    case CalibratedQuantity::tau_w: return "tau_w";
    case CalibratedQuantity::a: return "a";
    case CalibratedQuantity::b: return "b";
    case CalibratedQuantity::psp_amplitude: return "psp_amplitude";
    }
    return "?";
}

CalibratedQuantity parse_quantity(std::string_view name) {
    for (CalibratedQuantity q : kOrder) {
        if (quantity_name(q) == name) {
            return q;
        }
    }
    throw InvalidConfig("unknown calibrated quantity '" + std::string(name) + "'");
}

void validate_plan(const std::vector<CalibratedQuantity>& plan) {
    int last = -1;
    for (CalibratedQuantity q : plan) {
        const int rank = static_cast<int>(q);
        if (rank <= last) {
            throw InvalidConfig("calibration plan: '" + std::string(quantity_name(q)) +
                                "' is out of dependency order or repeated");
        }
        last = rank;
    }
}

std::vector<CalibratedQuantity> default_plan(const CalibrationTarget& target, bool with_offset) {
    std::vector<CalibratedQuantity> plan;
    const CircuitNeuronConfig dummy;
    for (CalibratedQuantity q : kOrder) {
        if (q == CalibratedQuantity::offset ? with_offset : target_of(target, q, dummy).has_value()) {
            plan.push_back(q);
        }
    }
    return plan;
}

bool NeuronCalibration::converged() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const QuantityOutcome& o) { return o.converged; });
}

bool CalibrationResult::all_converged() const {
    return std::all_of(neurons.begin(), neurons.end(), [](const NeuronCalibration& n) { return n.converged(); });
}

std::size_t CalibrationResult::converged_count() const {
    return static_cast<std::size_t>(
        std::count_if(neurons.begin(), neurons.end(), [](const NeuronCalibration& n) { return n.converged(); }));
}

NeuronCalibration calibrate_neuron(const CircuitNeuronConfig& neuron, const CalibrationTarget& target,
                                   const std::vector<CalibratedQuantity>& plan, const CalibrationOptions& options) {
    validate_plan(plan);
    NeuronCalibration out;
    out.config = neuron;
    CircuitNeuronConfig& n = out.config;
    for (CalibratedQuantity q : plan) {
        if (!target_of(target, q, n)) {
            throw InvalidConfig("calibration plan lists '" + std::string(quantity_name(q)) + "' without a target");
        }
        enable_for(n, q);
    }
    if (target.a && *target.a < 0.0) {
        n.adaptation.sign = Polarity::negative;
    } else if (target.a) {
        n.adaptation.sign = Polarity::positive;
    }
    const std::vector<Step> steps = expand(plan, n);

    auto needs_g_l = [](CalibratedQuantity q) { return q == CalibratedQuantity::v_t; };
    auto safe_measure = [&](const Step& s, const CircuitNeuronConfig& cfg, std::string* error) {
        try {
            const double g_l = needs_g_l(s.quantity) ? measured_g_l(cfg) : 0.0;
            return measure_quantity(s.quantity, cfg, g_l, s.side);
        } catch (const Error& e) {
            if (error != nullptr && error->empty()) {
                *error = e.what();
            }
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    for (const Step& s : steps) {
        QuantityOutcome o;
        o.quantity = s.quantity;
        o.bias_name = s.bias_name;
        o.target = *target_of(target, s.quantity, n);
        o.pre_measured = safe_measure(s, n, nullptr);
        o.pre_residual = relative_residual(o.pre_measured, o.target);
        out.outcomes.push_back(o);
    }

    for (std::size_t i = 0; i < steps.size(); ++i) {
        const Step& s = steps[i];
        QuantityOutcome& o = out.outcomes[i];
        const double tol = tolerance_for(s.quantity, options);
        try {
            if (o.target == 0.0) {
                // a = 0 or b = 0: the coupling is simply switched off.
                bias(n, s.bias_name) = 0.0;
                o.iterations = 0;
            } else {
                BiasBounds bounds = s.bounds;
                if (s.quantity == CalibratedQuantity::b && o.target < 0.0) {
                    bounds = {-s.bounds.hi, -s.bounds.lo};
                }
                const double g_l = needs_g_l(s.quantity) ? measured_g_l(n) : 0.0;
                const MeasureFn fn = [&](const CircuitNeuronConfig& cfg) {
                    return measure_quantity(s.quantity, cfg, g_l, s.side);
                };
                o.iterations = calibrate_parameter(n, o.target, s.bias_name, fn, bounds, tol, options.max_iter)
                                   .iterations;
            }
        } catch (const Error& e) {
            o.error = e.what();
        }
        o.bias = bias(n, s.bias_name);
    }

    for (std::size_t i = 0; i < steps.size(); ++i) {
        QuantityOutcome& o = out.outcomes[i];
        const double tol = tolerance_for(steps[i].quantity, options);
        o.post_measured = safe_measure(steps[i], n, &o.error);
        o.post_residual = relative_residual(o.post_measured, o.target);
        o.converged = std::isfinite(o.post_residual) && o.post_residual <= tol;
    }
    return out;
}

CalibrationResult calibrate_population(const Population& population, const CalibrationTarget& target,
                                       const std::vector<CalibratedQuantity>& plan,
                                       const CalibrationOptions& options) {
    validate_plan(plan);
    CalibrationResult result;
    const std::size_t n = population.neurons.size();
    result.neurons.resize(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            result.neurons[i] = calibrate_neuron(population.neurons[i], target, plan, options);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(n)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (CalibratedQuantity q : plan) {
        SpreadSummary s;
        s.quantity = q;
        std::vector<double> pre;
        std::vector<double> post;
        for (const auto& nc : result.neurons) {
            // First outcome of q per neuron (offset may have one per side).
            auto it = std::find_if(nc.outcomes.begin(), nc.outcomes.end(),
                                   [q](const QuantityOutcome& o) { return o.quantity == q; });
            if (it == nc.outcomes.end()) {
                continue;
            }
            if (std::isfinite(it->pre_measured)) {
                pre.push_back(it->pre_measured);
            }
            if (std::isfinite(it->post_measured)) {
                post.push_back(it->post_measured);
            }
            if (!it->converged) {
                ++s.failures;
            }
        }
        s.pre_mean = mean(pre);
        s.post_mean = mean(post);
        s.pre_cv = s.pre_mean != 0.0 ? stddev(pre) / std::abs(s.pre_mean) : 0.0;
        s.post_cv = s.post_mean != 0.0 ? stddev(post) / std::abs(s.post_mean) : 0.0;
        result.spread.push_back(s);
    }
    return result;
}

} // namespace adexsim
