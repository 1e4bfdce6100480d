#include "adexsim/experiments.hpp"

#include "adexsim/error.hpp"
#include "adexsim/measure.hpp"
#include "adexsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace adexsim {

bool ExperimentReport::passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

void ExperimentReport::add_gate(std::string name, double value, double limit, bool upper) {
    const bool ok = std::isfinite(value) && (upper ? value <= limit : value >= limit);
    gates.push_back({std::move(name), value, limit, upper, ok});
}

std::vector<PopulationStats> compute_statistics(const std::vector<MetricRow>& rows) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& r : rows) {
        for (const auto& [metric, v] : r.values) {
            keys.insert({r.group, metric});
        }
    }
    std::vector<PopulationStats> out;
    for (const auto& [group, metric] : keys) {
        std::vector<double> v;
        for (const auto& r : rows) {
            if (r.group != group) {
                continue;
            }
            auto it = r.values.find(metric);
            if (it != r.values.end() && std::isfinite(it->second)) {
                v.push_back(it->second);
            }
        }
        PopulationStats s;
        s.group = group;
        s.metric = metric;
        s.n = v.size();
        if (!v.empty()) {
            s.mean = mean(v);
            s.std = stddev(v);
            s.min = *std::min_element(v.begin(), v.end());
            s.max = *std::max_element(v.begin(), v.end());
            s.q25 = quantile(v, 0.25);
            s.median = median(v);
            s.q75 = quantile(v, 0.75);
        }
        out.push_back(s);
    }
    return out;
}

namespace {

std::string fmt(const char* pattern, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

Population make_population(const CircuitNeuronConfig& nominal, const PopulationSetup& setup) {
    if (setup.mismatch) {
        return sample_population(nominal, table_mismatch(nominal, setup.seed), setup.size);
    }
    return Population{std::vector<CircuitNeuronConfig>(setup.size, nominal)};
}

std::string calibration_errors(const NeuronCalibration& nc) {
    std::string msg;
    for (const auto& o : nc.outcomes) {
        if (!o.converged) {
            if (!msg.empty()) {
                msg += "; ";
            }
            msg += std::string(quantity_name(o.quantity)) + ": " +
                   (o.error.empty() ? "residual " + fmt("%.3g", o.post_residual) : o.error);
        }
    }
    return msg;
}

// Calibrated configurations (or the population itself) plus per-neuron notes.
std::vector<NeuronCalibration> prepare(const Population& pop, const CalibrationTarget& target,
                                       const PopulationSetup& setup) {
    if (!setup.calibrate) {
        std::vector<NeuronCalibration> out;
        for (const auto& n : pop.neurons) {
            out.push_back({n, {}});
        }
        return out;
    }
    return calibrate_population(pop, target, default_plan(target), setup.calibration).neurons;
}

void finish(ExperimentReport& report) { report.stats = compute_statistics(report.rows); }

} // namespace

// ---------------------------------------------------------------------------

ExperimentReport run_leak_over_threshold(const LeakOverThresholdConfig& cfg) {
    if (cfg.tau_m_targets.empty()) {
        throw InvalidConfig("leak-over-threshold: no tau_m targets");
    }
    ExperimentReport report;
    report.experiment = "leak_over_threshold";
    for (double tau : cfg.tau_m_targets) {
        CircuitNeuronConfig nominal = nominal_circuit();
        nominal.leak.I_bias = nominal.C_mem / tau / nominal.leak.g_per_bias;
        nominal.E_l = cfg.E_l;
        nominal.V_det = cfg.V_det;
        nominal.V_r = cfg.V_r;
        nominal.t_ref = cfg.t_ref;

        AdExParameters ideal = derive_effective_adex(nominal);
        ideal.g_l = ideal.C / tau;
        const double predicted = predicted_lot_isi(ideal, cfg.I_stim);
        const double dt = tau / cfg.steps_per_tau;

        const Population pop = make_population(nominal, cfg.population);
        CalibrationTarget target;
        target.tau_m = tau;

        auto run_group = [&](const std::string& group, const std::vector<NeuronCalibration>& neurons) {
            std::vector<double> errors;
            for (std::size_t i = 0; i < neurons.size(); ++i) {
                MetricRow row;
                row.group = group;
                row.index = i;
                row.error = calibration_errors(neurons[i]);
                CircuitSimulationOptions opt;
                opt.use_initial = true;
                opt.initial = resting_state(neurons[i].config);
                opt.initial.V_m = cfg.V_r;
                // Generous window: an uncalibrated neuron may be several times slower.
                const double T = 3.0 * static_cast<double>(cfg.intervals + 1) * predicted;
                const auto tr = circuit_simulate(neurons[i].config, StimulusProgram::constant(cfg.I_stim), {}, {},
                                                 T, dt, opt);
                if (tr.spikes.size() < cfg.intervals + 1) {
                    row.error += (row.error.empty() ? "" : "; ") + std::string("too few spikes");
                    row.values["spikes"] = static_cast<double>(tr.spikes.size());
                    report.rows.push_back(row);
                    continue;
                }
                // Initial condition is V_r, so every interval is a full one.
                const double isi = (tr.spikes[cfg.intervals] - tr.spikes[0]) / static_cast<double>(cfg.intervals);
                row.values["isi"] = isi;
                row.values["predicted_isi"] = predicted;
                row.values["relative_error"] = (isi - predicted) / predicted;
                for (const auto& o : neurons[i].outcomes) {
                    row.values["pre_tau_m"] = o.pre_measured;
                    row.values["post_tau_m"] = o.post_measured;
                }
                errors.push_back(std::abs(isi - predicted) / predicted);
                report.rows.push_back(row);
            }
            return errors;
        };

        const std::string label = "tau_m=" + fmt("%.4g", tau * 1e6) + "us";
        const auto errors = run_group(label, prepare(pop, target, cfg.population));
        report.add_gate("median |ISI-predicted|/predicted at " + label,
                        errors.empty() ? INFINITY : median(errors), cfg.max_median_error, true);
        if (cfg.include_uncalibrated) {
            PopulationSetup raw = cfg.population;
            raw.calibrate = false;
            run_group("uncalibrated " + label, prepare(pop, target, raw));
        }
    }
    finish(report);
    if (cfg.include_uncalibrated) {
        for (double tau : cfg.tau_m_targets) {
            const std::string label = "tau_m=" + fmt("%.4g", tau * 1e6) + "us";
            double cal = NAN;
            double raw = NAN;
            for (const auto& s : report.stats) {
                if (s.metric == "isi" && s.group == label) {
                    cal = s.std / s.mean;
                }
                if (s.metric == "isi" && s.group == "uncalibrated " + label) {
                    raw = s.std / s.mean;
                }
            }
            report.add_gate("ISI spread calibrated/uncalibrated at " + label, cal / raw, 1.0, true);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct PspReading {
    double baseline = 0.0;
    double amplitude = 0.0;
};

PspReading psp_reading(const CircuitNeuronConfig& neuron, double weight, std::size_t n_events) {
    CircuitNeuronConfig c = neuron;
    c.enables.threshold = false;
    c.exponential.enabled = false;
    c.adaptation.enabled = false;
    const double tau_m = c.tau_m();
    const double tau_s = c.syn_exc.tau_syn();
    const double dt = std::min(tau_m, tau_s) / 100.0;
    const double sep = 8.0 * std::max(tau_m, tau_s);
    const double t0 = 20.0 * dt;
    std::vector<SpikeEvent> events;
    for (std::size_t k = 0; k < n_events; ++k) {
        events.push_back({t0 + static_cast<double>(k) * sep, weight});
    }
    CircuitSimulationOptions opt;
    opt.use_initial = true;
    opt.initial = resting_state(c);
    opt.initial.V_m = measure_resting_potential(c);
    const auto tr = circuit_simulate(c, StimulusProgram{}, WeightedSpikeTrain(events), {},
                                     t0 + static_cast<double>(n_events) * sep, dt, opt);
    PspReading r;
    std::size_t k0 = 0;
    double sum = 0.0;
    while (tr.time_of(k0) < t0 - 0.5 * dt) {
        sum += tr.samples[k0].V;
        ++k0;
    }
    r.baseline = sum / static_cast<double>(k0);
    double total = 0.0;
    for (std::size_t e = 0; e < n_events; ++e) {
        const double start = t0 + static_cast<double>(e) * sep;
        double peak = 0.0;
        for (std::size_t k = 0; k < tr.samples.size(); ++k) {
            const double t = tr.time_of(k);
            if (t < start - 0.5 * dt || t >= start + sep - 0.5 * dt) {
                continue;
            }
            const double d = tr.samples[k].V - r.baseline;
            if (std::abs(d) > std::abs(peak)) {
                peak = d;
            }
        }
        total += peak;
    }
    r.amplitude = n_events > 0 ? total / static_cast<double>(n_events) : 0.0;
    return r;
}

} // namespace

ExperimentReport run_psp_experiment(const PspExperimentConfig& cfg) {
    ExperimentReport report;
    report.experiment = "psp";
    CircuitNeuronConfig nominal = cfg.nominal;
    nominal.syn_exc.enabled = true;
    nominal.syn_exc.coba_enabled = false;
    nominal.syn_exc.I_b_tau = nominal.syn_exc.C_line / (cfg.tau_syn * nominal.syn_exc.g_line_per_bias);
    // CUBA amplitude is proportional to OTA1's bias in its linear range.
    const double amp0 = measure_psp_amplitude(nominal);
    if (!(amp0 > 0.0)) {
        throw InvalidConfig("psp: nominal synapse produces no PSP");
    }
    nominal.syn_exc.ota1.I_bias *= cfg.amplitude / amp0;

    const Population pop = make_population(nominal, cfg.population);
    CalibrationTarget target;
    target.tau_syn = cfg.tau_syn;
    target.tau_m = nominal.tau_m();
    target.psp_amplitude = cfg.amplitude;
    std::vector<CalibratedQuantity> plan = default_plan(target, true);

    auto record = [&](const std::string& group, const CircuitNeuronConfig& n, std::size_t i, const std::string& err) {
        MetricRow row;
        row.group = group;
        row.index = i;
        row.error = err;
        try {
            const PspReading r = psp_reading(n, cfg.weight, cfg.n_events);
            row.values["baseline"] = r.baseline;
            row.values["amplitude"] = r.amplitude;
        } catch (const Error& e) {
            row.error += (row.error.empty() ? "" : "; ") + std::string(e.what());
        }
        report.rows.push_back(row);
    };

    for (std::size_t i = 0; i < pop.neurons.size(); ++i) {
        record("uncalibrated", pop.neurons[i], i, "");
    }
    if (cfg.population.calibrate) {
        const auto cal = calibrate_population(pop, target, plan, cfg.population.calibration);
        for (std::size_t i = 0; i < cal.neurons.size(); ++i) {
            record("calibrated", cal.neurons[i].config, i, calibration_errors(cal.neurons[i]));
        }
    }
    finish(report);
    auto stat = [&](const std::string& group, const std::string& metric) {
        for (const auto& s : report.stats) {
            if (s.group == group && s.metric == metric) {
                return s;
            }
        }
        return PopulationStats{};
    };
    if (cfg.population.calibrate) {
        const auto raw = stat("uncalibrated", "baseline");
        const auto cal = stat("calibrated", "baseline");
        report.add_gate("baseline std calibrated/uncalibrated", raw.std > 0.0 ? cal.std / raw.std : 0.0, 1.0,
                        true);
        const auto amp = stat("calibrated", "amplitude");
        report.add_gate("calibrated amplitude std/mean", amp.mean != 0.0 ? amp.std / std::abs(amp.mean) : INFINITY,
                        cfg.max_amplitude_cv, true);
    }
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_coba_sweep(const CobaSweepConfig& cfg) {
    if (cfg.points < 3) {
        throw InvalidConfig("coba sweep: need at least three holding potentials");
    }
    ExperimentReport report;
    report.experiment = "coba_reversal";
    const bool exc = cfg.sign == SynapseSign::excitatory;
    for (double E : cfg.reversal_targets) {
        CircuitNeuronConfig n = cfg.neuron;
        n.enables.threshold = false;
        n.exponential.enabled = false;
        n.adaptation.enabled = false;
        SynInCircuitConfig& syn = exc ? n.syn_exc : n.syn_inh;
        (exc ? n.syn_inh : n.syn_exc).enabled = false;
        syn.enabled = true;
        syn.coba_enabled = true;
        syn.sign = cfg.sign;
        // Keep OTA1's static bias; place E_syn_hat so the virtual reversal is E.
        const double shift = syn.I_b_cuba() / syn.g2;
        syn.E_syn_hat = exc ? E - shift : E + shift;
        const double reversal = syn.virtual_reversal();

        const std::string group = "E_syn=" + fmt("%.4g", reversal) + "V";
        const double tau_m = n.tau_m();
        const double tau_s = syn.tau_syn();
        const double dt = std::min(tau_m, tau_s) / 200.0;
        const double t0 = 20.0 * dt;
        std::vector<double> xs;
        std::vector<double> ys;
        double peak = 0.0;
        std::vector<MetricRow> rows;
        for (std::size_t i = 0; i < cfg.points; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(cfg.points - 1);
            n.E_l = E + (2.0 * f - 1.0) * cfg.sweep_half_width;
            const WeightedSpikeTrain train({{t0, cfg.weight}});
            const WeightedSpikeTrain none;
            const auto tr = circuit_simulate(n, StimulusProgram{}, exc ? train : none, exc ? none : train,
                                             t0 + 8.0 * std::max(tau_m, tau_s), dt);
            const PspMetrics m = psp_metrics(tr, t0);
            MetricRow row;
            row.group = group;
            row.index = i;
            row.values["holding_potential"] = m.baseline;
            row.values["amplitude"] = m.amplitude;
            rows.push_back(row);
            peak = std::max(peak, std::abs(m.amplitude));
        }
        for (auto& row : rows) {
            const double a = row.values["amplitude"];
            // Clamped points carry no current and say nothing about the slope.
            if (std::abs(a) > 1e-3 * peak) {
                xs.push_back(row.values["holding_potential"]);
                ys.push_back(a);
            }
            report.rows.push_back(row);
        }
        double crossing = NAN;
        double r2 = 0.0;
        if (xs.size() >= 3) {
            const LinearFit line = fit_line(xs, ys);
            crossing = line.x_at_zero();
            r2 = line.r_squared;
        }
        MetricRow summary;
        summary.group = group + " fit";
        summary.values["virtual_reversal"] = reversal;
        summary.values["zero_crossing"] = crossing;
        summary.values["r_squared"] = r2;
        summary.values["fitted_points"] = static_cast<double>(xs.size());
        report.rows.push_back(summary);
        report.add_gate("|zero crossing - E_syn| at " + group, std::abs(crossing - reversal), cfg.tolerance, true);
        report.add_gate("affine fit R^2 at " + group, r2, 0.999, false);
    }
    finish(report);
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_exponential_sweep(const ExponentialSweepConfig& cfg) {
    ExperimentReport report;
    report.experiment = "exponential_sweep";
    CircuitNeuronConfig n = cfg.neuron;
    n.exponential.enabled = true;
    const double g_l = n.leak.transconductance();
    ExponentialSweep sweep;
    sweep.decades = cfg.min_decades;

    double worst_slope = 0.0;
    double worst_shift = 0.0;
    double fewest_decades = INFINITY;
    for (double dT : cfg.slopes) {
        auto& ex = n.exponential;
        ex.ota.I_bias = ex.n * ex.V_therm / (8.0 * ex.r_conv * dT * ex.ota.g_per_bias);
        const std::string group = "Delta_T=" + fmt("%.4g", dT * 1e3) + "mV";
        double reference = NAN;
        for (std::size_t i = 0; i < cfg.onsets.size(); ++i) {
            ex.V_exp = cfg.onsets[i];
            MetricRow row;
            row.group = group;
            row.index = i;
            row.values["V_exp"] = ex.V_exp;
            row.values["delta_t_eff"] = ex.delta_t_eff();
            try {
                const auto m = measure_exponential(n, g_l, sweep);
                row.values["delta_t_fit"] = m.delta_t;
                row.values["decades"] = m.decades;
                row.values["r_squared"] = m.r_squared;
                row.values["slope_error"] = std::abs(m.delta_t - ex.delta_t_eff()) / ex.delta_t_eff();
                worst_slope = std::max(worst_slope, row.values["slope_error"]);
                fewest_decades = std::min(fewest_decades, m.decades);
                if (i == 0) {
                    reference = m.delta_t;
                } else {
                    worst_shift = std::max(worst_shift, std::abs(m.delta_t / reference - 1.0));
                }
            } catch (const FitFailed& e) {
                row.error = e.what();
                fewest_decades = 0.0;
            }
            report.rows.push_back(row);
        }
    }
    // Disabled circuit.
    ExponentialCircuitConfig off = n.exponential;
    off.enabled = false;
    double max_off = 0.0;
    for (double V = -1.0; V <= 2.0; V += 0.01) {
        max_off = std::max(max_off, std::abs(exponential_current(V, off, false)));
    }
    finish(report);
    report.add_gate("max slope error vs Delta_T_eff", worst_slope, cfg.max_slope_error, true);
    report.add_gate("min decades below saturation", fewest_decades, cfg.min_decades, false);
    report.add_gate("max slope change under onset shift", worst_shift, cfg.max_onset_slope_change, true);
    report.add_gate("max |I_exp| with circuit disabled", max_off, 0.0, true);
    return report;
}

// ---------------------------------------------------------------------------

CalibrationTarget target_from(const AdExParameters& hw) {
    CalibrationTarget t;
    t.tau_m = hw.tau_m();
    if (hw.exp_enabled) {
        t.delta_t = hw.Delta_T;
        t.v_t = hw.V_T;
    }
    if (hw.a != 0.0 || hw.b != 0.0) {
        t.tau_w = hw.tau_w;
        t.a = hw.a;
        t.b = hw.b;
    }
    return t;
}

ExperimentReport run_firing_patterns(const FiringPatternConfig& cfg) {
    ExperimentReport report;
    report.experiment = "firing_patterns";
    for (const PatternSet& set : cfg.sets) {
        const double T_bio = set.onset + set.window;
        const auto stim = StimulusProgram::step(set.onset, set.I_stim, T_bio);
        const auto ideal = simulate(set.params, stim, {}, T_bio, cfg.dt_bio);
        const auto label = classify_firing_pattern(ideal.spikes, set.onset, set.window, cfg.thresholds);
        MetricRow row;
        row.group = "ideal";
        row.index = report.rows.size();
        row.labels["pattern"] = set.name;
        row.labels["label"] = std::string(label_name(label));
        row.values["spikes"] = static_cast<double>(ideal.spikes.size());
        if (!ideal.spikes.empty()) {
            row.values["latency"] = ideal.spikes.front() - set.onset;
        }
        report.rows.push_back(row);
        report.add_gate("ideal label matches for " + set.name, label == set.expected ? 1.0 : 0.0, 1.0, false);
        if (cfg.keep_traces) {
            report.traces.push_back({"ideal/" + set.name, ideal, std::nullopt});
        }
        if (!cfg.run_circuit) {
            continue;
        }

        double i_scale = 0.0;
        const AdExParameters hw = to_hardware(set.params, cfg.mapping, &i_scale);
        const CircuitNeuronConfig nominal = ideal_equivalent_circuit(hw);
        const Population pop = make_population(nominal, cfg.population);
        const auto neurons = prepare(pop, target_from(hw), cfg.population);
        const double onset_hw = bio_time_to_hardware(set.onset, cfg.mapping);
        const double window_hw = bio_time_to_hardware(set.window, cfg.mapping);
        const double dt_hw = bio_time_to_hardware(cfg.dt_bio, cfg.mapping);
        const auto stim_hw = StimulusProgram::step(onset_hw, set.I_stim * i_scale, onset_hw + window_hw);
        const std::string group = "circuit/" + set.name;
        std::size_t matches = 0;
        for (std::size_t i = 0; i < neurons.size(); ++i) {
            MetricRow r;
            r.group = group;
            r.index = i;
            r.error = calibration_errors(neurons[i]);
            try {
                const auto tr = circuit_simulate(neurons[i].config, stim_hw, {}, {}, onset_hw + window_hw, dt_hw);
                const auto l = classify_firing_pattern(tr.spikes, onset_hw, window_hw, cfg.thresholds);
                r.labels["label"] = std::string(label_name(l));
                r.values["spikes"] = static_cast<double>(tr.spikes.size());
                r.values["match"] = l == set.expected ? 1.0 : 0.0;
                matches += l == set.expected ? 1 : 0;
                if (cfg.keep_traces && i == 0) {
                    report.traces.push_back({group + "/0", tr, neurons[i].config});
                }
            } catch (const Error& e) {
                r.error += (r.error.empty() ? "" : "; ") + std::string(e.what());
            }
            report.rows.push_back(r);
        }
        const double agreement =
            neurons.empty() ? 0.0 : static_cast<double>(matches) / static_cast<double>(neurons.size());
        report.add_gate("circuit label agreement for " + set.name, agreement, cfg.min_agreement, false);
    }
    finish(report);
    return report;
}

} // namespace adexsim
