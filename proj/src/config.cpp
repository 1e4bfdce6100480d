#include "adexsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace adexsim {

namespace {

struct Prefix {
    std::string_view symbol;
    double scale;
};

constexpr std::array<Prefix, 10> kPrefixes{{
    {"", 1.0}, {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6},
    {"\xC2\xB5", 1e-6}, {"m", 1e-3}, {"k", 1e3}, {"M", 1e6}, {"G", 1e9},
}};

std::string_view base_unit(Dimension dim) {
    switch (dim) {
    case Dimension::voltage: return "V";
    case Dimension::current: return "A";
    case Dimension::capacitance: return "F";
    case Dimension::conductance: return "S";
    case Dimension::time: return "s";
    case Dimension::resistance: return "ohm";
    case Dimension::none: return "";
    }
    return "";
}

std::string_view dimension_name(Dimension dim) {
    switch (dim) {
    case Dimension::voltage: return "voltage";
    case Dimension::current: return "current";
    case Dimension::capacitance: return "capacitance";
    case Dimension::conductance: return "conductance";
    case Dimension::time: return "time";
    case Dimension::resistance: return "resistance";
    case Dimension::none: return "dimensionless number";
    }
    return "";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string shortest(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// ---------------------------------------------------------------------------

ParseError error_at(const YAML::Node& node, const std::string& what) {
    const YAML::Mark m = node.Mark();
    return ParseError(what, m.line < 0 ? 0 : m.line + 1, m.column < 0 ? 0 : m.column + 1);
}

/// A mapping whose keys are checked off as they are read; finish() rejects
/// whatever is left.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.IsMap()) throw error_at(node_, "'" + path_ + "' must be a mapping");
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node take(const std::string& key) {
        seen_.insert(key);
        return node_[key];
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw error_at(kv.first, "unknown key '" + where(key) + "'");
        }
    }

    std::string scalar(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) throw error_at(n, "'" + where(key) + "' must be a scalar");
        return n.Scalar();
    }

    void quantity(const std::string& key, Dimension dim, double& out) {
        if (!has(key)) return;
        const YAML::Node n = take(key);
        out = physical(n, key, dim);
    }

    double physical(const YAML::Node& n, const std::string& key, Dimension dim) const {
        try {
            return parse_physical(scalar(n, key), dim);
        } catch (const ParseError& e) {
            throw error_at(n, "'" + where(key) + "': " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" (line")));
        }
    }

    void quantities(const std::string& key, Dimension dim, std::vector<double>& out) {
        if (!has(key)) return;
        const YAML::Node n = take(key);
        if (!n.IsSequence()) throw error_at(n, "'" + where(key) + "' must be a list");
        out.clear();
        for (const auto& item : n) out.push_back(physical(item, key, dim));
    }

    void flag(const std::string& key, bool& out) {
        if (!has(key)) return;
        const YAML::Node n = take(key);
        const std::string s = scalar(n, key);
        if (s == "true") out = true;
        else if (s == "false") out = false;
        else throw error_at(n, "'" + where(key) + "' must be true or false, got '" + s + "'");
    }

    template <class Int>
    void integer(const std::string& key, Int& out, Int min_value = 0) {
        if (!has(key)) return;
        const YAML::Node n = take(key);
        const std::string s = scalar(n, key);
        Int v{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw error_at(n, "'" + where(key) + "' must be an integer, got '" + s + "'");
        if (v < min_value)
            throw ValidationError(where(key) + " = " + s + " violates " + key + " >= " + std::to_string(min_value));
        out = v;
    }

    void text(const std::string& key, std::string& out) {
        if (!has(key)) return;
        out = scalar(take(key), key);
    }

    template <class Enum, class Parse>
    void choice(const std::string& key, Enum& out, Parse parse) {
        if (!has(key)) return;
        const YAML::Node n = take(key);
        const std::string s = scalar(n, key);
        try {
            out = parse(s);
        } catch (const InvalidConfig&) {
            throw error_at(n, "'" + where(key) + "': unknown value '" + s + "'");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum lookup(const std::array<std::pair<std::string_view, Enum>, N>& table, std::string_view s) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    throw InvalidConfig("unknown value");
}

template <class Enum, std::size_t N>
std::string_view reverse(const std::array<std::pair<std::string_view, Enum>, N>& table, Enum e) {
    for (const auto& [name, value] : table)
        if (value == e) return name;
    return "?";
}

constexpr std::array<std::pair<std::string_view, RunMode>, 4> kModes{{
    {"simulate", RunMode::simulate}, {"calibrate", RunMode::calibrate},
    {"experiment", RunMode::experiment}, {"sweep", RunMode::sweep},
}};
constexpr std::array<std::pair<std::string_view, ModelKind>, 2> kModels{{
    {"ideal", ModelKind::ideal}, {"circuit", ModelKind::circuit},
}};
constexpr std::array<std::pair<std::string_view, OutputFormat>, 2> kFormats{{
    {"csv", OutputFormat::csv}, {"json", OutputFormat::json},
}};
constexpr std::array<std::pair<std::string_view, SynapseMode>, 2> kSynModes{{
    {"cuba", SynapseMode::cuba}, {"coba", SynapseMode::coba},
}};
constexpr std::array<std::pair<std::string_view, SynapseSign>, 2> kSigns{{
    {"excitatory", SynapseSign::excitatory}, {"inhibitory", SynapseSign::inhibitory},
}};

const std::set<std::string>& experiment_names() {
    static const std::set<std::string> names{"leak_over_threshold", "psp", "coba_reversal",
                                             "exponential_sweep", "firing_patterns"};
    return names;
}

// ---------------------------------------------------------------------------

void read_neuron(Section& s, AdExParameters& p) {
    s.quantity("C", Dimension::capacitance, p.C);
    if (s.has("g_l") && s.has("tau_m"))
        throw error_at(s.take("tau_m"), "'" + s.where("tau_m") + "' conflicts with g_l; give one of them");
    s.quantity("g_l", Dimension::conductance, p.g_l);
    if (s.has("tau_m")) {
        double tau = 0.0;
        s.quantity("tau_m", Dimension::time, tau);
        if (!(tau > 0.0))
            throw ValidationError(s.where("tau_m") + " = " + format_physical(tau, Dimension::time) +
                                  " violates tau_m > 0");
        p.g_l = p.C / tau;
    }
    s.quantity("E_l", Dimension::voltage, p.E_l);
    s.quantity("V_T", Dimension::voltage, p.V_T);
    s.quantity("Delta_T", Dimension::voltage, p.Delta_T);
    s.quantity("tau_w", Dimension::time, p.tau_w);
    s.quantity("a", Dimension::conductance, p.a);
    s.quantity("b", Dimension::current, p.b);
    s.quantity("V_r", Dimension::voltage, p.V_r);
    s.quantity("V_det", Dimension::voltage, p.V_det);
    s.quantity("t_ref", Dimension::time, p.t_ref);
    s.flag("exp_enabled", p.exp_enabled);
    s.flag("exp_gated_in_ref", p.exp_gated_in_ref);
    s.finish();
}

void check_neuron(const AdExParameters& p, const std::string& where) {
    if (!(p.g_l > 0.0))
        throw ValidationError(where + ".g_l = " + format_physical(p.g_l, Dimension::conductance) +
                              " violates g_l > 0");
    if (!(p.tau_w > 0.0))
        throw ValidationError(where + ".tau_w = " + format_physical(p.tau_w, Dimension::time) +
                              " violates tau_w > 0");
    try {
        p.validate();
    } catch (const InvalidConfig& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

SynapseSpec read_synapse(const YAML::Node& n, const std::string& path) {
    Section s(n, path);
    SynapseSpec spec;
    SynapseConfig& c = spec.config;
    s.choice("mode", c.mode, [](const std::string& v) { return lookup(kSynModes, v); });
    s.choice("sign", c.sign, [](const std::string& v) { return lookup(kSigns, v); });
    s.quantity("tau_syn", Dimension::time, c.tau_syn);
    s.quantity("I_hat", Dimension::current, c.I_hat);
    s.quantity("g_hat", Dimension::conductance, c.g_hat);
    s.quantity("E_syn", Dimension::voltage, c.E_syn);
    if (s.has("events")) {
        const YAML::Node ev = s.take("events");
        if (!ev.IsSequence()) throw error_at(ev, "'" + s.where("events") + "' must be a list");
        std::size_t i = 0;
        for (const auto& item : ev) {
            Section e(item, s.where("events") + "[" + std::to_string(i++) + "]");
            SpikeEvent event;
            e.quantity("time", Dimension::time, event.time);
            e.quantity("weight", Dimension::none, event.weight);
            e.finish();
            spec.events.push_back(event);
        }
    }
    s.finish();
    return spec;
}

void read_population(Section& s, PopulationSetup& pop) {
    s.integer<std::size_t>("size", pop.size, 1);
    s.flag("mismatch", pop.mismatch);
    s.flag("calibrate", pop.calibrate);
    s.quantity("tol", Dimension::none, pop.calibration.tol);
    s.quantity("potential_tol", Dimension::none, pop.calibration.potential_tol);
    s.integer<int>("max_iter", pop.calibration.max_iter, 1);
    s.finish();
}

template <class Fn>
void optional_section(const YAML::Node& root, std::set<std::string>& seen, const std::string& key, Fn fn) {
    seen.insert(key);
    if (!root[key]) return;
    Section s(root[key], key);
    fn(s);
    s.finish();
}

// ---------------------------------------------------------------------------

void emit_q(YAML::Emitter& out, const char* key, double v, Dimension dim) {
    out << YAML::Key << key << YAML::Value << format_physical(v, dim);
}

void emit_list(YAML::Emitter& out, const char* key, const std::vector<double>& v, Dimension dim) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << format_physical(x, dim);
    out << YAML::EndSeq;
}

void emit_neuron(YAML::Emitter& out, const AdExParameters& p) {
    out << YAML::Key << "neuron" << YAML::Value << YAML::BeginMap;
    emit_q(out, "C", p.C, Dimension::capacitance);
    emit_q(out, "g_l", p.g_l, Dimension::conductance);
    emit_q(out, "E_l", p.E_l, Dimension::voltage);
    emit_q(out, "V_T", p.V_T, Dimension::voltage);
    emit_q(out, "Delta_T", p.Delta_T, Dimension::voltage);
    emit_q(out, "tau_w", p.tau_w, Dimension::time);
    emit_q(out, "a", p.a, Dimension::conductance);
    emit_q(out, "b", p.b, Dimension::current);
    emit_q(out, "V_r", p.V_r, Dimension::voltage);
    emit_q(out, "V_det", p.V_det, Dimension::voltage);
    emit_q(out, "t_ref", p.t_ref, Dimension::time);
    out << YAML::Key << "exp_enabled" << YAML::Value << p.exp_enabled;
    out << YAML::Key << "exp_gated_in_ref" << YAML::Value << p.exp_gated_in_ref;
    out << YAML::EndMap;
}

YAML::Node parse_yaml(std::string_view text) {
    try {
        YAML::Node root = YAML::Load(std::string(text));
        if (root.IsNull()) return YAML::Node(YAML::NodeType::Map);
        return root;
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

// ---------------------------------------------------------------------------

double parse_physical(std::string_view text, Dimension dim) {
    const std::string_view s = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr == s.data())
        throw ParseError("expected a " + std::string(dimension_name(dim)) + ", got '" + std::string(s) + "'", 0, 0);
    if (!std::isfinite(value)) throw ParseError("value '" + std::string(s) + "' is not finite", 0, 0);
    const std::string_view unit = trim(s.substr(static_cast<std::size_t>(ptr - s.data())));
    if (dim == Dimension::none) {
        if (!unit.empty()) throw ParseError("unexpected unit '" + std::string(unit) + "' on a dimensionless value", 0, 0);
        return value;
    }
    const std::string_view base = base_unit(dim);
    if (unit.empty())
        throw ParseError("missing unit on " + std::string(dimension_name(dim)) + " '" + std::string(s) +
                             "' (e.g. '20 m" + std::string(base) + "')", 0, 0);
    if (unit.size() >= base.size() && unit.substr(unit.size() - base.size()) == base) {
        const std::string_view prefix = unit.substr(0, unit.size() - base.size());
        for (const auto& p : kPrefixes)
            if (p.symbol == prefix) return value * p.scale;
    }
    throw ParseError("unit '" + std::string(unit) + "' is not a " + std::string(dimension_name(dim)) + " unit", 0, 0);
}

std::string format_physical(double value, Dimension dim) {
    std::string s = shortest(value);
    if (dim != Dimension::none) s += " " + std::string(base_unit(dim));
    return s;
}

StimulusProgram StimulusSpec::program() const {
    return StimulusProgram::step(onset, amplitude, stop);
}

std::string_view mode_name(RunMode m) { return reverse(kModes, m); }
std::string_view model_name(ModelKind m) { return reverse(kModels, m); }

Dimension sweep_parameter_dimension(std::string_view parameter) {
    static const std::array<std::pair<std::string_view, Dimension>, 14> table{{
        {"stimulus.amplitude", Dimension::current}, {"stimulus.onset", Dimension::time},
        {"neuron.C", Dimension::capacitance},       {"neuron.g_l", Dimension::conductance},
        {"neuron.tau_m", Dimension::time},          {"neuron.E_l", Dimension::voltage},
        {"neuron.V_T", Dimension::voltage},         {"neuron.Delta_T", Dimension::voltage},
        {"neuron.tau_w", Dimension::time},          {"neuron.a", Dimension::conductance},
        {"neuron.b", Dimension::current},           {"neuron.V_r", Dimension::voltage},
        {"neuron.V_det", Dimension::voltage},       {"neuron.t_ref", Dimension::time},
    }};
    for (const auto& [name, dim] : table)
        if (name == parameter) return dim;
    throw InvalidConfig("unknown sweep parameter '" + std::string(parameter) + "'");
}

void apply_sweep_value(RunConfig& cfg, std::string_view parameter, double value) {
    sweep_parameter_dimension(parameter);
    AdExParameters& n = cfg.neuron;
    if (parameter == "stimulus.amplitude") cfg.stimulus.amplitude = value;
    else if (parameter == "stimulus.onset") cfg.stimulus.onset = value;
    else if (parameter == "neuron.C") n.C = value;
    else if (parameter == "neuron.g_l") n.g_l = value;
    else if (parameter == "neuron.tau_m") n.g_l = n.C / value;
    else if (parameter == "neuron.E_l") n.E_l = value;
    else if (parameter == "neuron.V_T") n.V_T = value;
    else if (parameter == "neuron.Delta_T") n.Delta_T = value;
    else if (parameter == "neuron.tau_w") n.tau_w = value;
    else if (parameter == "neuron.a") n.a = value;
    else if (parameter == "neuron.b") n.b = value;
    else if (parameter == "neuron.V_r") n.V_r = value;
    else if (parameter == "neuron.V_det") n.V_det = value;
    else if (parameter == "neuron.t_ref") n.t_ref = value;
}

RunConfig parse_config(std::string_view text) {
    const YAML::Node root = parse_yaml(text);
    if (!root.IsMap()) throw error_at(root, "configuration must be a mapping of sections");
    RunConfig cfg;
    std::set<std::string> seen;

    optional_section(root, seen, "run", [&](Section& s) {
        s.choice("mode", cfg.mode, [](const std::string& v) { return lookup(kModes, v); });
        s.choice("model", cfg.model, [](const std::string& v) { return lookup(kModels, v); });
        if (s.has("experiment")) {
            const YAML::Node n = s.take("experiment");
            cfg.experiment = s.scalar(n, "experiment");
            if (!experiment_names().count(cfg.experiment))
                throw error_at(n, "'run.experiment': unknown experiment '" + cfg.experiment + "'");
        }
        s.integer<std::uint64_t>("seed", cfg.seed);
        s.quantity("dt", Dimension::time, cfg.dt);
        s.quantity("duration", Dimension::time, cfg.duration);
        s.text("out", cfg.output_dir);
        s.choice("format", cfg.format, [](const std::string& v) { return lookup(kFormats, v); });
    });
    optional_section(root, seen, "neuron", [&](Section& s) { read_neuron(s, cfg.neuron); });
    optional_section(root, seen, "stimulus", [&](Section& s) {
        s.quantity("onset", Dimension::time, cfg.stimulus.onset);
        s.quantity("amplitude", Dimension::current, cfg.stimulus.amplitude);
        s.quantity("stop", Dimension::time, cfg.stimulus.stop);
    });
    seen.insert("synapses");
    if (const YAML::Node syn = root["synapses"]) {
        if (!syn.IsSequence()) throw error_at(syn, "'synapses' must be a list");
        std::size_t i = 0;
        for (const auto& item : syn) cfg.synapses.push_back(read_synapse(item, "synapses[" + std::to_string(i++) + "]"));
    }
    seen.insert("population");
    if (root["population"]) {
        Section s(root["population"], "population");
        read_population(s, cfg.population);
    }
    optional_section(root, seen, "calibration", [&](Section& s) {
        if (!s.has("plan")) return;
        const YAML::Node plan = s.take("plan");
        if (!plan.IsSequence()) throw error_at(plan, "'calibration.plan' must be a list");
        for (const auto& item : plan) {
            const std::string name = s.scalar(item, "plan");
            try {
                cfg.plan.push_back(parse_quantity(name));
            } catch (const InvalidConfig&) {
                throw error_at(item, "'calibration.plan': unknown quantity '" + name + "'");
            }
        }
    });
    optional_section(root, seen, "leak_over_threshold", [&](Section& s) {
        LotSpec& l = cfg.leak_over_threshold;
        s.quantities("tau_m_targets", Dimension::time, l.tau_m_targets);
        s.quantity("E_l", Dimension::voltage, l.E_l);
        s.quantity("V_det", Dimension::voltage, l.V_det);
        s.quantity("V_r", Dimension::voltage, l.V_r);
        s.quantity("t_ref", Dimension::time, l.t_ref);
        s.quantity("I_stim", Dimension::current, l.I_stim);
        s.integer<std::size_t>("intervals", l.intervals, 1);
        s.quantity("max_median_error", Dimension::none, l.max_median_error);
        s.flag("include_uncalibrated", l.include_uncalibrated);
    });
    optional_section(root, seen, "psp", [&](Section& s) {
        PspSpec& p = cfg.psp;
        s.quantity("tau_syn", Dimension::time, p.tau_syn);
        s.quantity("amplitude", Dimension::voltage, p.amplitude);
        s.quantity("weight", Dimension::none, p.weight);
        s.integer<std::size_t>("n_events", p.n_events, 1);
        s.quantity("max_amplitude_cv", Dimension::none, p.max_amplitude_cv);
    });
    optional_section(root, seen, "coba_reversal", [&](Section& s) {
        CobaSpec& c = cfg.coba_reversal;
        s.quantities("reversals", Dimension::voltage, c.reversals);
        s.choice("sign", c.sign, [](const std::string& v) { return lookup(kSigns, v); });
        s.quantity("half_width", Dimension::voltage, c.half_width);
        s.integer<std::size_t>("points", c.points, 3);
        s.quantity("weight", Dimension::none, c.weight);
        s.quantity("tolerance", Dimension::voltage, c.tolerance);
    });
    optional_section(root, seen, "exponential_sweep", [&](Section& s) {
        ExponentialSweepSpec& e = cfg.exponential_sweep;
        s.quantities("onsets", Dimension::voltage, e.onsets);
        s.quantities("slopes", Dimension::voltage, e.slopes);
        s.quantity("min_decades", Dimension::none, e.min_decades);
        s.quantity("max_slope_error", Dimension::none, e.max_slope_error);
        s.quantity("max_onset_slope_change", Dimension::none, e.max_onset_slope_change);
    });
    optional_section(root, seen, "firing_patterns", [&](Section& s) {
        PatternsSpec& f = cfg.firing_patterns;
        if (s.has("files")) {
            const YAML::Node files = s.take("files");
            if (!files.IsSequence()) throw error_at(files, "'firing_patterns.files' must be a list");
            f.files.clear();
            for (const auto& item : files) f.files.push_back(s.scalar(item, "files"));
        }
        s.quantity("min_agreement", Dimension::none, f.min_agreement);
        s.flag("circuit", f.circuit);
        s.quantity("dt_bio", Dimension::time, f.dt_bio);
    });
    optional_section(root, seen, "sweep", [&](Section& s) {
        SweepSpec& w = cfg.sweep;
        if (s.has("parameter")) {
            const YAML::Node n = s.take("parameter");
            w.parameter = s.scalar(n, "parameter");
            try {
                sweep_parameter_dimension(w.parameter);
            } catch (const InvalidConfig& e) {
                throw error_at(n, "'sweep.parameter': " + std::string(e.what()));
            }
        }
        s.quantities("values", sweep_parameter_dimension(w.parameter), w.values);
    });

    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (!seen.count(key)) throw error_at(kv.first, "unknown section '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

void validate(const RunConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ValidationError(what);
    };
    auto fmt = format_physical;
    require(cfg.dt > 0.0, "run.dt = " + fmt(cfg.dt, Dimension::time) + " violates dt > 0");
    require(cfg.duration > 0.0, "run.duration = " + fmt(cfg.duration, Dimension::time) + " violates duration > 0");
    require(cfg.dt <= cfg.duration, "run.dt must not exceed run.duration");
    require(cfg.mode != RunMode::experiment || !cfg.experiment.empty(),
            "run.mode = experiment requires run.experiment");
    check_neuron(cfg.neuron, "neuron");
    require(cfg.stimulus.onset >= 0.0, "stimulus.onset violates onset >= 0");
    require(cfg.stimulus.stop < 0.0 || cfg.stimulus.stop > cfg.stimulus.onset,
            "stimulus.stop must lie after stimulus.onset");
    for (std::size_t i = 0; i < cfg.synapses.size(); ++i) {
        const std::string where = "synapses[" + std::to_string(i) + "]";
        const SynapseSpec& s = cfg.synapses[i];
        require(s.config.tau_syn > 0.0,
                where + ".tau_syn = " + fmt(s.config.tau_syn, Dimension::time) + " violates tau_syn > 0");
        try {
            s.config.validate();
            static_cast<void>(WeightedSpikeTrain(s.events));
        } catch (const InvalidConfig& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    require(cfg.population.calibration.tol > 0.0, "population.tol violates tol > 0");
    require(cfg.population.calibration.potential_tol > 0.0, "population.potential_tol violates potential_tol > 0");
    for (double t : cfg.leak_over_threshold.tau_m_targets)
        require(t > 0.0, "leak_over_threshold.tau_m_targets: " + fmt(t, Dimension::time) + " violates tau_m > 0");
    require(cfg.leak_over_threshold.E_l > cfg.leak_over_threshold.V_det,
            "leak_over_threshold requires E_l > V_det");
    require(cfg.leak_over_threshold.V_r < cfg.leak_over_threshold.V_det,
            "leak_over_threshold requires V_r < V_det");
    require(cfg.psp.tau_syn > 0.0, "psp.tau_syn violates tau_syn > 0");
    require(cfg.psp.weight >= 0.0, "psp.weight violates weight >= 0");
    require(cfg.coba_reversal.half_width > 0.0, "coba_reversal.half_width violates half_width > 0");
    require(cfg.coba_reversal.weight > 0.0, "coba_reversal.weight violates weight > 0");
    for (double d : cfg.exponential_sweep.slopes)
        require(d > 0.0, "exponential_sweep.slopes: " + fmt(d, Dimension::voltage) + " violates Delta_T > 0");
    require(cfg.firing_patterns.min_agreement >= 0.0 && cfg.firing_patterns.min_agreement <= 1.0,
            "firing_patterns.min_agreement must lie in [0, 1]");
    require(cfg.firing_patterns.dt_bio > 0.0, "firing_patterns.dt_bio violates dt > 0");
    require(cfg.mode != RunMode::experiment || cfg.experiment != "firing_patterns" ||
                !cfg.firing_patterns.files.empty(),
            "firing_patterns.files must list at least one pattern file");
    require(cfg.mode != RunMode::sweep || !cfg.sweep.values.empty(), "sweep.values must not be empty");
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path));
}

std::string serialize_config(const RunConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mode" << YAML::Value << std::string(mode_name(cfg.mode));
    out << YAML::Key << "model" << YAML::Value << std::string(model_name(cfg.model));
    if (!cfg.experiment.empty()) out << YAML::Key << "experiment" << YAML::Value << cfg.experiment;
    out << YAML::Key << "seed" << YAML::Value << std::to_string(cfg.seed);
    emit_q(out, "dt", cfg.dt, Dimension::time);
    emit_q(out, "duration", cfg.duration, Dimension::time);
    if (!cfg.output_dir.empty()) out << YAML::Key << "out" << YAML::Value << YAML::DoubleQuoted << cfg.output_dir;
    out << YAML::Key << "format" << YAML::Value << std::string(reverse(kFormats, cfg.format));
    out << YAML::EndMap;

    emit_neuron(out, cfg.neuron);

    out << YAML::Key << "stimulus" << YAML::Value << YAML::BeginMap;
    emit_q(out, "onset", cfg.stimulus.onset, Dimension::time);
    emit_q(out, "amplitude", cfg.stimulus.amplitude, Dimension::current);
    emit_q(out, "stop", cfg.stimulus.stop, Dimension::time);
    out << YAML::EndMap;

    if (!cfg.synapses.empty()) {
        out << YAML::Key << "synapses" << YAML::Value << YAML::BeginSeq;
        for (const SynapseSpec& s : cfg.synapses) {
            out << YAML::BeginMap;
            out << YAML::Key << "mode" << YAML::Value << std::string(reverse(kSynModes, s.config.mode));
            out << YAML::Key << "sign" << YAML::Value << std::string(reverse(kSigns, s.config.sign));
            emit_q(out, "tau_syn", s.config.tau_syn, Dimension::time);
            emit_q(out, "I_hat", s.config.I_hat, Dimension::current);
            emit_q(out, "g_hat", s.config.g_hat, Dimension::conductance);
            emit_q(out, "E_syn", s.config.E_syn, Dimension::voltage);
            out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
            for (const SpikeEvent& e : s.events) {
                out << YAML::Flow << YAML::BeginMap;
                emit_q(out, "time", e.time, Dimension::time);
                emit_q(out, "weight", e.weight, Dimension::none);
                out << YAML::EndMap;
            }
            out << YAML::EndSeq << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    const PopulationSetup& pop = cfg.population;
    out << YAML::Key << "population" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "size" << YAML::Value << std::to_string(pop.size);
    out << YAML::Key << "mismatch" << YAML::Value << pop.mismatch;
    out << YAML::Key << "calibrate" << YAML::Value << pop.calibrate;
    emit_q(out, "tol", pop.calibration.tol, Dimension::none);
    emit_q(out, "potential_tol", pop.calibration.potential_tol, Dimension::none);
    out << YAML::Key << "max_iter" << YAML::Value << std::to_string(pop.calibration.max_iter);
    out << YAML::EndMap;

    if (!cfg.plan.empty()) {
        out << YAML::Key << "calibration" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "plan" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (CalibratedQuantity q : cfg.plan) out << std::string(quantity_name(q));
        out << YAML::EndSeq << YAML::EndMap;
    }

    const LotSpec& l = cfg.leak_over_threshold;
    out << YAML::Key << "leak_over_threshold" << YAML::Value << YAML::BeginMap;
    emit_list(out, "tau_m_targets", l.tau_m_targets, Dimension::time);
    emit_q(out, "E_l", l.E_l, Dimension::voltage);
    emit_q(out, "V_det", l.V_det, Dimension::voltage);
    emit_q(out, "V_r", l.V_r, Dimension::voltage);
    emit_q(out, "t_ref", l.t_ref, Dimension::time);
    emit_q(out, "I_stim", l.I_stim, Dimension::current);
    out << YAML::Key << "intervals" << YAML::Value << std::to_string(l.intervals);
    emit_q(out, "max_median_error", l.max_median_error, Dimension::none);
    out << YAML::Key << "include_uncalibrated" << YAML::Value << l.include_uncalibrated;
    out << YAML::EndMap;

    const PspSpec& p = cfg.psp;
    out << YAML::Key << "psp" << YAML::Value << YAML::BeginMap;
    emit_q(out, "tau_syn", p.tau_syn, Dimension::time);
    emit_q(out, "amplitude", p.amplitude, Dimension::voltage);
    emit_q(out, "weight", p.weight, Dimension::none);
    out << YAML::Key << "n_events" << YAML::Value << std::to_string(p.n_events);
    emit_q(out, "max_amplitude_cv", p.max_amplitude_cv, Dimension::none);
    out << YAML::EndMap;

    const CobaSpec& c = cfg.coba_reversal;
    out << YAML::Key << "coba_reversal" << YAML::Value << YAML::BeginMap;
    emit_list(out, "reversals", c.reversals, Dimension::voltage);
    out << YAML::Key << "sign" << YAML::Value << std::string(reverse(kSigns, c.sign));
    emit_q(out, "half_width", c.half_width, Dimension::voltage);
    out << YAML::Key << "points" << YAML::Value << std::to_string(c.points);
    emit_q(out, "weight", c.weight, Dimension::none);
    emit_q(out, "tolerance", c.tolerance, Dimension::voltage);
    out << YAML::EndMap;

    const ExponentialSweepSpec& e = cfg.exponential_sweep;
    out << YAML::Key << "exponential_sweep" << YAML::Value << YAML::BeginMap;
    emit_list(out, "onsets", e.onsets, Dimension::voltage);
    emit_list(out, "slopes", e.slopes, Dimension::voltage);
    emit_q(out, "min_decades", e.min_decades, Dimension::none);
    emit_q(out, "max_slope_error", e.max_slope_error, Dimension::none);
    emit_q(out, "max_onset_slope_change", e.max_onset_slope_change, Dimension::none);
    out << YAML::EndMap;

    const PatternsSpec& f = cfg.firing_patterns;
    out << YAML::Key << "firing_patterns" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "files" << YAML::Value << YAML::BeginSeq;
    for (const std::string& file : f.files) out << YAML::DoubleQuoted << file;
    out << YAML::EndSeq;
    emit_q(out, "min_agreement", f.min_agreement, Dimension::none);
    out << YAML::Key << "circuit" << YAML::Value << f.circuit;
    emit_q(out, "dt_bio", f.dt_bio, Dimension::time);
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "parameter" << YAML::Value << cfg.sweep.parameter;
    emit_list(out, "values", cfg.sweep.values, sweep_parameter_dimension(cfg.sweep.parameter));
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------

PatternSet parse_pattern_set(std::string_view text) {
    const YAML::Node root = parse_yaml(text);
    if (!root.IsMap()) throw error_at(root, "pattern file must be a mapping of sections");
    PatternSet set;
    std::set<std::string> seen;
    optional_section(root, seen, "pattern", [&](Section& s) {
        s.text("name", set.name);
        s.choice("expected", set.expected, [](const std::string& v) { return parse_label(v); });
    });
    optional_section(root, seen, "neuron", [&](Section& s) { read_neuron(s, set.params); });
    optional_section(root, seen, "stimulus", [&](Section& s) {
        s.quantity("amplitude", Dimension::current, set.I_stim);
        s.quantity("onset", Dimension::time, set.onset);
        s.quantity("window", Dimension::time, set.window);
    });
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (!seen.count(key)) throw error_at(kv.first, "unknown section '" + key + "'");
    }
    if (set.name.empty()) throw ValidationError("pattern.name must not be empty");
    check_neuron(set.params, "neuron");
    if (!(set.window > 0.0)) throw ValidationError("stimulus.window violates window > 0");
    if (set.onset < 0.0) throw ValidationError("stimulus.onset violates onset >= 0");
    return set;
}

PatternSet load_pattern_set(const std::filesystem::path& path) {
    return parse_pattern_set(read_file(path));
}

std::string serialize_pattern_set(const PatternSet& set) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "pattern" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << set.name;
    out << YAML::Key << "expected" << YAML::Value << std::string(label_name(set.expected));
    out << YAML::EndMap;
    emit_neuron(out, set.params);
    out << YAML::Key << "stimulus" << YAML::Value << YAML::BeginMap;
    emit_q(out, "amplitude", set.I_stim, Dimension::current);
    emit_q(out, "onset", set.onset, Dimension::time);
    emit_q(out, "window", set.window, Dimension::time);
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace adexsim
