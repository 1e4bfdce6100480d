#include "adexsim/io.hpp"

#include "adexsim/config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace adexsim {

namespace {

using nlohmann::json;

struct Row {
    double t_us, V_mV, w_nA, s_exc, s_inh;
};

Row exported(const SimulationTrace& trace, std::size_t k, const TraceExport& how) {
    const TraceSample& s = trace.samples[k];
    double w = s.w;
    if (how.adaptation) w = adaptation_current(s.w, *how.adaptation);
    return {trace.time_of(k) * 1e6, s.V * 1e3, w * 1e9, s.s_exc / how.exc_jump_per_weight,
            s.s_inh / how.inh_jump_per_weight};
}

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf;
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

TraceExport circuit_export(const CircuitNeuronConfig& cfg, bool synapses) {
    TraceExport how;
    how.synapses = synapses;
    how.adaptation = &cfg.adaptation;
    how.exc_jump_per_weight = cfg.syn_exc.jump_per_weight();
    how.inh_jump_per_weight = cfg.syn_inh.jump_per_weight();
    return how;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const TraceExport& how) {
    out << "time_us,V_mV,w_nA";
    if (how.synapses) out << ",s_exc,s_inh";
    out << '\n';
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const Row r = exported(trace, k, how);
        put(out, r.t_us);
        out << ',';
        put(out, r.V_mV);
        out << ',';
        put(out, r.w_nA);
        if (how.synapses) {
            out << ',';
            put(out, r.s_exc);
            out << ',';
            put(out, r.s_inh);
        }
        out << '\n';
    }
}

SimulationTrace read_trace_csv(std::istream& in) {
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line)) throw ParseError("empty trace file", 1, 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t columns = 0;
    if (line == "time_us,V_mV,w_nA") columns = 3;
    else if (line == "time_us,V_mV,w_nA,s_exc,s_inh") columns = 5;
    else throw ParseError("unexpected header '" + line + "'", 1, 1);

    SimulationTrace trace;
    trace.w_quantity = AdaptationQuantity::current;
    std::vector<double> times;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v[5] = {0, 0, 0, 0, 0};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < columns; ++c) {
            auto [next, ec] = std::from_chars(p, end, v[c]);
            if (ec != std::errc{})
                throw ParseError("malformed number", line_no, static_cast<int>(p - line.data()) + 1);
            p = next;
            if (c + 1 < columns) {
                if (p == end || *p != ',')
                    throw ParseError("expected ','", line_no, static_cast<int>(p - line.data()) + 1);
                ++p;
            }
        }
        if (p != end) throw ParseError("trailing characters", line_no, static_cast<int>(p - line.data()) + 1);
        times.push_back(v[0] * 1e-6);
        trace.samples.push_back({v[1] * 1e-3, v[2] * 1e-9, v[3], v[4]});
    }
    if (times.size() >= 2) trace.dt = times[1] - times[0];
    return trace;
}

void write_spikes_csv(std::ostream& out, const SimulationTrace& trace) {
    out << "spike_time_us\n";
    for (double t : trace.spikes) {
        put(out, t * 1e6);
        out << '\n';
    }
}

std::string trace_json(const SimulationTrace& trace, const TraceExport& how) {
    json t = json::array(), V = json::array(), w = json::array(), se = json::array(), si = json::array();
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const Row r = exported(trace, k, how);
        t.push_back(r.t_us);
        V.push_back(r.V_mV);
        w.push_back(r.w_nA);
        if (how.synapses) {
            se.push_back(r.s_exc);
            si.push_back(r.s_inh);
        }
    }
    json spikes = json::array();
    for (double s : trace.spikes) spikes.push_back(s * 1e6);
    json j{{"time_us", t}, {"V_mV", V}, {"w_nA", w}, {"spike_time_us", spikes}};
    if (how.synapses) {
        j["s_exc"] = se;
        j["s_inh"] = si;
    }
    return j.dump() + "\n";
}

std::string report_json(const ExperimentReport& report) {
    json gates = json::array();
    for (const Gate& g : report.gates)
        gates.push_back({{"name", g.name}, {"value", finite_or_null(g.value)}, {"limit", g.limit},
                         {"bound", g.upper ? "upper" : "lower"}, {"passed", g.passed}});
    json stats = json::array();
    for (const PopulationStats& s : report.stats)
        stats.push_back({{"group", s.group}, {"metric", s.metric}, {"n", s.n}, {"mean", finite_or_null(s.mean)},
                         {"std", finite_or_null(s.std)}, {"min", finite_or_null(s.min)},
                         {"q25", finite_or_null(s.q25)}, {"median", finite_or_null(s.median)},
                         {"q75", finite_or_null(s.q75)}, {"max", finite_or_null(s.max)}});
    json rows = json::array();
    for (const MetricRow& r : report.rows) {
        json values = json::object();
        for (const auto& [k, v] : r.values) values[k] = finite_or_null(v);
        json row{{"group", r.group}, {"index", r.index}, {"values", values}, {"labels", r.labels}};
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(row);
    }
    json j{{"experiment", report.experiment}, {"passed", report.passed()},
           {"gates", gates}, {"stats", stats}, {"rows", rows}};
    return j.dump(2) + "\n";
}

std::string calibration_json(const CalibrationResult& result) {
    json spread = json::array();
    for (const SpreadSummary& s : result.spread)
        spread.push_back({{"quantity", std::string(quantity_name(s.quantity))},
                          {"pre_mean", finite_or_null(s.pre_mean)}, {"pre_cv", finite_or_null(s.pre_cv)},
                          {"post_mean", finite_or_null(s.post_mean)}, {"post_cv", finite_or_null(s.post_cv)},
                          {"failures", s.failures}});
    json neurons = json::array();
    for (std::size_t i = 0; i < result.neurons.size(); ++i) {
        const NeuronCalibration& n = result.neurons[i];
        json biases = json::object();
        for (const std::string& name : bias_names()) biases[name] = bias(n.config, name);
        json outcomes = json::array();
        for (const QuantityOutcome& o : n.outcomes) {
            json jo{{"quantity", std::string(quantity_name(o.quantity))}, {"bias", o.bias_name},
                    {"value", finite_or_null(o.bias)}, {"target", o.target},
                    {"pre_measured", finite_or_null(o.pre_measured)},
                    {"post_measured", finite_or_null(o.post_measured)},
                    {"post_residual", finite_or_null(o.post_residual)},
                    {"iterations", o.iterations}, {"converged", o.converged}};
            if (!o.error.empty()) jo["error"] = o.error;
            outcomes.push_back(jo);
        }
        neurons.push_back({{"index", i}, {"converged", n.converged()}, {"biases", biases}, {"outcomes", outcomes}});
    }
    json j{{"all_converged", result.all_converged()}, {"converged_count", result.converged_count()},
           {"size", result.neurons.size()}, {"spread", spread}, {"neurons", neurons}};
    return j.dump(2) + "\n";
}

} // namespace adexsim
