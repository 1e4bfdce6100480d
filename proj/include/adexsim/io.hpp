#pragma once

#include "adexsim/calibration.hpp"
#include "adexsim/circuit.hpp"
#include "adexsim/experiments.hpp"
#include "adexsim/trace.hpp"

#include <iosfwd>
#include <string>

namespace adexsim {

/// How a trace maps onto the exported columns time_us, V_mV, w_nA and,
/// with synapses, s_exc and s_inh (dimensionless, in weight units).
struct TraceExport {
    bool synapses = false;
    /// Set for circuit traces: V_w is converted to I_w.
    const AdaptationCircuitConfig* adaptation = nullptr;
    double exc_jump_per_weight = 1.0;
    double inh_jump_per_weight = 1.0;
};

TraceExport circuit_export(const CircuitNeuronConfig& cfg, bool synapses);

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const TraceExport& how = {});
/// Reads a trace written by write_trace_csv. The result holds SI values with
/// w as a current; spikes are not part of the CSV. Throws ParseError.
SimulationTrace read_trace_csv(std::istream& in);

void write_spikes_csv(std::ostream& out, const SimulationTrace& trace);

std::string trace_json(const SimulationTrace& trace, const TraceExport& how = {});
std::string report_json(const ExperimentReport& report);
std::string calibration_json(const CalibrationResult& result);

} // namespace adexsim
