#include "adexsim/adex.hpp"
#include "adexsim/calibration.hpp"
#include "adexsim/circuit.hpp"
#include "adexsim/classify.hpp"
#include "adexsim/config.hpp"
#include "adexsim/experiments.hpp"
#include "adexsim/io.hpp"
#include "adexsim/mismatch.hpp"
#include "adexsim/stats.hpp"
#include "adexsim/synapse.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace adexsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;  // a gate failed or calibration did not converge
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct OutputDirError : Error {
    using Error::Error;
};

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

struct Outcome {
    std::vector<OutputFile> files;
    bool ok = true;
    json summary = json::object();
};

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    unsigned jobs = 1;
};

fs::path resolve_output_dir(const CommonOptions& opt, const RunConfig& cfg) {
    if (!opt.out.empty()) return opt.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("ADEXSIM_OUT"); env && *env) return env;
    return "adexsim_out";
}

// Fails before any work is done, so an unusable directory never ends up
// holding a partial result.
void prepare_output_dir(const fs::path& out) {
    std::error_code ec;
    if (fs::exists(out, ec) && !fs::is_directory(out, ec)) {
        throw OutputDirError("output path '" + out.string() + "' exists and is not a directory");
    }
    fs::create_directories(out, ec);
    if (ec) throw OutputDirError("cannot create output directory '" + out.string() + "': " + ec.message());
    const fs::path probe = out / ".adexsim-probe";
    {
        std::ofstream f(probe);
        if (!f) throw OutputDirError("output directory '" + out.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

// Everything is staged as *.part and renamed once all writes succeeded.
void commit(const fs::path& out, const std::vector<OutputFile>& files) {
    std::vector<fs::path> staged;
    auto roll_back = [&]() {
        std::error_code ec;
        for (const auto& p : staged) fs::remove(p, ec);
    };
    for (const auto& f : files) {
        const fs::path final_path = out / f.name;
        const fs::path tmp = final_path.string() + ".part";
        std::error_code ec;
        fs::create_directories(final_path.parent_path(), ec);
        std::ofstream s(tmp, std::ios::binary);
        if (s) staged.push_back(tmp);
        s << f.content;
        s.close();
        if (!s || ec) {
            roll_back();
            throw OutputDirError("failed writing '" + final_path.string() + "'");
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(staged[i], out / files[i].name, ec);
        if (ec) {
            roll_back();
            throw OutputDirError("failed to finalize '" + (out / files[i].name).string() + "'");
        }
    }
}

std::string trace_file(const SimulationTrace& trace, const TraceExport& how, OutputFormat format) {
    if (format == OutputFormat::json) return trace_json(trace, how);
    std::ostringstream s;
    write_trace_csv(s, trace, how);
    return s.str();
}

std::string trace_extension(OutputFormat f) { return f == OutputFormat::json ? ".json" : ".csv"; }

std::string spikes_csv(const SimulationTrace& trace) {
    std::ostringstream s;
    write_spikes_csv(s, trace);
    return s.str();
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string safe_name(std::string s) {
    for (char& c : s) {
        if (c == '/' || c == ' ' || c == '=' || c == ':') c = '_';
    }
    return s;
}

json spike_summary(const SimulationTrace& trace) {
    json j{{"spikes", trace.spikes.size()}};
    const auto isi = trace.interspike_intervals();
    j["first_spike_us"] = trace.spikes.empty() ? json(nullptr) : json(trace.spikes.front() * 1e6);
    j["mean_isi_us"] = isi.empty() ? json(nullptr) : json(mean(isi) * 1e6);
    return j;
}

// ---------------------------------------------------------------------------

RunConfig load(const CommonOptions& opt) {
    RunConfig cfg = opt.config.empty() ? RunConfig{} : load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.format == "csv") cfg.format = OutputFormat::csv;
    else if (opt.format == "json") cfg.format = OutputFormat::json;
    cfg.population.calibration.jobs = opt.jobs;
    cfg.population.seed = cfg.seed;
    return cfg;
}

fs::path config_dir(const CommonOptions& opt) {
    return opt.config.empty() ? fs::current_path() : fs::absolute(opt.config).parent_path();
}

CircuitNeuronConfig circuit_base(const RunConfig& cfg) {
    CircuitNeuronConfig c = ideal_equivalent_circuit(cfg.neuron);
    for (const SynapseSpec& s : cfg.synapses) {
        SynInCircuitConfig& syn = s.config.sign == SynapseSign::excitatory ? c.syn_exc : c.syn_inh;
        if (syn.enabled) throw InvalidConfig("circuit model: at most one synapse per sign");
        syn = synapse_circuit_for(s.config, syn);
    }
    return c;
}

CircuitNeuronConfig circuit_neuron(const RunConfig& cfg) {
    CircuitNeuronConfig c = circuit_base(cfg);
    if (cfg.population.mismatch) {
        c = sample_population(c, table_mismatch(c, cfg.seed), 1).neurons.front();
        if (cfg.population.calibrate) {
            const CalibrationTarget target = target_from(cfg.neuron);
            // Synaptic inputs bring follower offsets that shift the resting potential.
            const bool offsets = !cfg.synapses.empty();
            c = calibrate_neuron(c, target, cfg.plan.empty() ? default_plan(target, offsets) : cfg.plan,
                                 cfg.population.calibration)
                    .config;
        }
    }
    return c;
}

struct SimulationRun {
    SimulationTrace trace;
    TraceExport how;
    std::optional<CircuitNeuronConfig> circuit;
};

SimulationRun run_model(const RunConfig& cfg) {
    SimulationRun run;
    const StimulusProgram stim = cfg.stimulus.program();
    if (cfg.model == ModelKind::ideal) {
        std::vector<SynapticInput> inputs;
        for (const SynapseSpec& s : cfg.synapses) inputs.push_back({s.config, WeightedSpikeTrain(s.events)});
        run.trace = simulate(cfg.neuron, stim, inputs, cfg.duration, cfg.dt);
        run.how.synapses = !inputs.empty();
        return run;
    }
    run.circuit = circuit_neuron(cfg);
    WeightedSpikeTrain exc, inh;
    for (const SynapseSpec& s : cfg.synapses) {
        (s.config.sign == SynapseSign::excitatory ? exc : inh) = WeightedSpikeTrain(s.events);
    }
    run.trace = circuit_simulate(*run.circuit, stim, exc, inh, cfg.duration, cfg.dt);
    run.how = circuit_export(*run.circuit, !cfg.synapses.empty());
    return run;
}

Outcome cmd_simulate(const RunConfig& cfg) {
    Outcome o;
    const SimulationRun run = run_model(cfg);
    o.files.push_back({"trace" + trace_extension(cfg.format), trace_file(run.trace, run.how, cfg.format)});
    o.files.push_back({"spikes.csv", spikes_csv(run.trace)});
    o.summary = spike_summary(run.trace);
    o.summary["model"] = std::string(model_name(cfg.model));
    return o;
}

Outcome cmd_calibrate(const RunConfig& cfg) {
    Outcome o;
    const CircuitNeuronConfig base = circuit_base(cfg);
    const Population pop = cfg.population.mismatch
                               ? sample_population(base, table_mismatch(base, cfg.seed), cfg.population.size)
                               : Population{std::vector<CircuitNeuronConfig>(cfg.population.size, base)};
    const CalibrationTarget target = target_from(cfg.neuron);
    const auto plan = cfg.plan.empty() ? default_plan(target, !cfg.synapses.empty()) : cfg.plan;
    const CalibrationResult result = calibrate_population(pop, target, plan, cfg.population.calibration);
    o.files.push_back({"calibration.json", calibration_json(result)});
    std::ostringstream csv;
    csv << "index";
    for (const auto& name : bias_names()) csv << ',' << name;
    csv << ",converged\n";
    for (std::size_t i = 0; i < result.neurons.size(); ++i) {
        csv << i;
        for (const auto& name : bias_names()) csv << ',' << format_physical(bias(result.neurons[i].config, name), Dimension::none);
        csv << ',' << (result.neurons[i].converged() ? 1 : 0) << '\n';
    }
    o.files.push_back({"biases.csv", csv.str()});
    o.ok = result.all_converged();
    o.summary = {{"neurons", result.neurons.size()}, {"converged", result.converged_count()}};
    return o;
}

ExperimentReport run_named_experiment(const RunConfig& cfg, const fs::path& base_dir) {
    const std::string& name = cfg.experiment;
    if (name == "leak_over_threshold") {
        const LotSpec& s = cfg.leak_over_threshold;
        LeakOverThresholdConfig e;
        e.tau_m_targets = s.tau_m_targets;
        e.E_l = s.E_l;
        e.V_det = s.V_det;
        e.V_r = s.V_r;
        e.t_ref = s.t_ref;
        e.I_stim = s.I_stim;
        e.intervals = s.intervals;
        e.max_median_error = s.max_median_error;
        e.include_uncalibrated = s.include_uncalibrated;
        e.population = cfg.population;
        return run_leak_over_threshold(e);
    }
    if (name == "psp") {
        PspExperimentConfig e;
        e.tau_syn = cfg.psp.tau_syn;
        e.amplitude = cfg.psp.amplitude;
        e.weight = cfg.psp.weight;
        e.n_events = cfg.psp.n_events;
        e.max_amplitude_cv = cfg.psp.max_amplitude_cv;
        e.population = cfg.population;
        return run_psp_experiment(e);
    }
    if (name == "coba_reversal") {
        CobaSweepConfig e;
        e.reversal_targets = cfg.coba_reversal.reversals;
        e.sign = cfg.coba_reversal.sign;
        e.sweep_half_width = cfg.coba_reversal.half_width;
        e.points = cfg.coba_reversal.points;
        e.weight = cfg.coba_reversal.weight;
        e.tolerance = cfg.coba_reversal.tolerance;
        return run_coba_sweep(e);
    }
    if (name == "exponential_sweep") {
        ExponentialSweepConfig e;
        e.onsets = cfg.exponential_sweep.onsets;
        e.slopes = cfg.exponential_sweep.slopes;
        e.min_decades = cfg.exponential_sweep.min_decades;
        e.max_slope_error = cfg.exponential_sweep.max_slope_error;
        e.max_onset_slope_change = cfg.exponential_sweep.max_onset_slope_change;
        return run_exponential_sweep(e);
    }
    if (name == "firing_patterns") {
        FiringPatternConfig e;
        if (cfg.firing_patterns.files.empty()) {
            throw ValidationError("firing_patterns.files must list at least one pattern file");
        }
        for (const auto& f : cfg.firing_patterns.files) {
            const fs::path p = fs::path(f).is_absolute() ? fs::path(f) : base_dir / f;
            e.sets.push_back(load_pattern_set(p));
        }
        e.min_agreement = cfg.firing_patterns.min_agreement;
        e.run_circuit = cfg.firing_patterns.circuit;
        e.dt_bio = cfg.firing_patterns.dt_bio;
        e.population = cfg.population;
        return run_firing_patterns(e);
    }
    throw InvalidConfig("unknown experiment '" + name + "'");
}

Outcome cmd_experiment(const RunConfig& cfg, const fs::path& base_dir) {
    Outcome o;
    const ExperimentReport report = run_named_experiment(cfg, base_dir);
    o.files.push_back({"report.json", report_json(report)});
    for (const NamedTrace& t : report.traces) {
        const TraceExport how = t.circuit ? circuit_export(*t.circuit, false) : TraceExport{};
        o.files.push_back({"traces/" + safe_name(t.name) + trace_extension(cfg.format), trace_file(t.trace, how, cfg.format)});
    }
    o.ok = report.passed();
    json failed = json::array();
    for (const Gate& g : report.gates) {
        if (!g.passed) failed.push_back(g.name);
    }
    o.summary = {{"experiment", report.experiment}, {"gates", report.gates.size()}, {"failed_gates", failed}};
    return o;
}

Outcome cmd_sweep(const RunConfig& cfg) {
    Outcome o;
    const Dimension dim = sweep_parameter_dimension(cfg.sweep.parameter);
    ExperimentReport report;
    report.experiment = "sweep";
    std::ostringstream csv;
    csv << "value,spikes,first_spike_us,mean_isi_us\n";
    for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
        RunConfig c = cfg;
        apply_sweep_value(c, cfg.sweep.parameter, cfg.sweep.values[i]);
        validate(c);
        const SimulationRun run = run_model(c);
        const json s = spike_summary(run.trace);
        MetricRow row;
        row.group = cfg.sweep.parameter;
        row.index = i;
        row.values["value"] = cfg.sweep.values[i];
        row.values["spikes"] = static_cast<double>(run.trace.spikes.size());
        row.labels["value"] = format_physical(cfg.sweep.values[i], dim);
        csv << number(cfg.sweep.values[i]) << ',' << run.trace.spikes.size() << ',';
        if (!s["first_spike_us"].is_null()) {
            row.values["first_spike"] = s["first_spike_us"].get<double>() * 1e-6;
            csv << number(s["first_spike_us"].get<double>());
        }
        csv << ',';
        if (!s["mean_isi_us"].is_null()) {
            row.values["mean_isi"] = s["mean_isi_us"].get<double>() * 1e-6;
            csv << number(s["mean_isi_us"].get<double>());
        }
        csv << '\n';
        report.rows.push_back(row);
    }
    report.stats = compute_statistics(report.rows);
    o.files.push_back({"sweep.csv", csv.str()});
    o.files.push_back({"report.json", report_json(report)});
    o.summary = {{"parameter", cfg.sweep.parameter}, {"points", cfg.sweep.values.size()}};
    return o;
}

Outcome cmd_analyze(const std::string& trace_path, const std::string& stim_time) {
    Outcome o;
    std::ifstream in(trace_path);
    if (!in) throw InvalidConfig("cannot open trace '" + trace_path + "'");
    const SimulationTrace trace = read_trace_csv(in);
    const auto pts = phase_plane(trace);
    std::ostringstream csv;
    csv << "V_mV,w_nA\n";
    for (const auto& p : pts) {
        csv << number(p.V * 1e3) << ',' << number(p.w * 1e9) << '\n';
    }
    o.files.push_back({"phase_plane.csv", csv.str()});
    json j{{"samples", trace.samples.size()}, {"dt_us", trace.dt * 1e6}, {"phase_points", pts.size()}};
    if (!stim_time.empty()) {
        const PspMetrics m = psp_metrics(trace, parse_physical(stim_time, Dimension::time));
        j["psp"] = {{"baseline_mV", m.baseline * 1e3}, {"amplitude_mV", m.amplitude * 1e3}};
    }
    o.files.push_back({"analysis.json", j.dump(2) + "\n"});
    o.summary = j;
    return o;
}

json error_json(const std::string& kind, const std::string& message) {
    return {{"status", "error"}, {"kind", kind}, {"message", message}};
}

void add_common(CLI::App* sub, CommonOptions& opt, bool config_required) {
    auto* c = sub->add_option("-c,--config", opt.config, "YAML run configuration")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--seed", opt.seed, "RNG seed, overrides run.seed (default " + std::to_string(kDefaultSeed) + ")");
    sub->add_option("-o,--out", opt.out, "output directory (else run.out, $ADEXSIM_OUT, ./adexsim_out)");
    sub->add_option("--format", opt.format, "trace format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("-j,--jobs", opt.jobs, "calibration worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AdEx neuron model, circuit model and calibration"};
    app.require_subcommand(1);

    CommonOptions opt;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate one neuron (ideal or circuit model)");
    add_common(simulate_cmd, opt, true);
    auto* calibrate_cmd = app.add_subcommand("calibrate", "calibrate a mismatched circuit population");
    add_common(calibrate_cmd, opt, true);
    auto* experiment_cmd = app.add_subcommand("experiment", "run a named experiment and check its gates");
    std::string experiment;
    experiment_cmd->add_option("name", experiment, "experiment name")
        ->required()
        ->check(CLI::IsMember({"leak_over_threshold", "psp", "coba_reversal", "exponential_sweep", "firing_patterns"}));
    add_common(experiment_cmd, opt, false);
    auto* sweep_cmd = app.add_subcommand("sweep", "simulate over the values of one parameter");
    add_common(sweep_cmd, opt, true);
    auto* analyze_cmd = app.add_subcommand("analyze", "phase plane and PSP metrics of a trace CSV");
    std::string trace_path, stim_time;
    analyze_cmd->add_option("trace", trace_path, "trace CSV written by simulate")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--stim-time", stim_time, "stimulus time for PSP metrics, e.g. '20 us'");
    analyze_cmd->add_option("-o,--out", opt.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; usage errors share the config error code.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    try {
        Outcome outcome;
        fs::path out;
        RunConfig cfg;
        if (*analyze_cmd) {
            command = "analyze";
            out = resolve_output_dir(opt, cfg);
            prepare_output_dir(out);
            outcome = cmd_analyze(trace_path, stim_time);
        } else {
            cfg = load(opt);
            if (*simulate_cmd) {
                command = "simulate";
                cfg.mode = RunMode::simulate;
            } else if (*calibrate_cmd) {
                command = "calibrate";
                cfg.mode = RunMode::calibrate;
            } else if (*experiment_cmd) {
                command = "experiment";
                cfg.mode = RunMode::experiment;
                cfg.experiment = experiment;
            } else {
                command = "sweep";
                cfg.mode = RunMode::sweep;
            }
            validate(cfg);
            out = resolve_output_dir(opt, cfg);
            prepare_output_dir(out);
            if (cfg.mode == RunMode::simulate) outcome = cmd_simulate(cfg);
            else if (cfg.mode == RunMode::calibrate) outcome = cmd_calibrate(cfg);
            else if (cfg.mode == RunMode::experiment) outcome = cmd_experiment(cfg, config_dir(opt));
            else outcome = cmd_sweep(cfg);
            outcome.files.push_back({"config.yaml", serialize_config(cfg)});
        }
        commit(out, outcome.files);

        json files = json::array();
        for (const auto& f : outcome.files) files.push_back(f.name);
        json summary{{"status", outcome.ok ? "ok" : "failed"}, {"command", command},
                     {"out", out.string()}, {"files", files}, {"result", outcome.summary}};
        if (!cfg.experiment.empty() || command == "simulate" || command == "calibrate" || command == "sweep") {
            summary["seed"] = cfg.seed;
        }
        std::cout << summary.dump() << std::endl;
        return outcome.ok ? kExitOk : kExitFailed;
    } catch (const ParseError& e) {
        json j = error_json("parse_error", e.what());
        j["line"] = e.line;
        j["column"] = e.column;
        std::cerr << j.dump() << std::endl;
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << error_json("validation_error", e.what()).dump() << std::endl;
        return kExitConfig;
    } catch (const InvalidConfig& e) {
        std::cerr << error_json("invalid_config", e.what()).dump() << std::endl;
        return kExitConfig;
    } catch (const OutputDirError& e) {
        std::cerr << error_json("output_error", e.what()).dump() << std::endl;
        return kExitConfig;
    } catch (const NonFiniteState& e) {
        std::cerr << error_json("non_finite_state", e.what()).dump() << std::endl;
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << error_json("runtime_error", e.what()).dump() << std::endl;
        return kExitRuntime;
    }
}
