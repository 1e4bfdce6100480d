#pragma once

#include <utility>
#include <vector>

namespace adexsim {

/// Piecewise-constant current stimulus. Segment i applies from its start
/// time until the next segment starts; the last one runs to the end.
class StimulusProgram {
public:
    struct Segment {
        double start = 0.0;   // s
        double current = 0.0; // A
    };

    StimulusProgram() : segments_{{0.0, 0.0}} {}
    /// Throws InvalidConfig unless starts are strictly increasing from t = 0.
    explicit StimulusProgram(std::vector<Segment> segments);

    static StimulusProgram constant(double current);
    /// Zero until `onset`, then `amplitude` (until `offset`, if given).
    static StimulusProgram step(double onset, double amplitude, double offset = -1.0);

    /// Current applied during the integration step starting at time t.
    double current_at(double t) const;
    const std::vector<Segment>& segments() const { return segments_; }

    bool operator==(const StimulusProgram&) const = default;

private:
    std::vector<Segment> segments_;
};

/// What the `w` column of a trace holds.
enum class AdaptationQuantity {
    current, ///< ideal model: w in amperes
    voltage, ///< circuit model: V_w in volts
};

struct TraceSample {
    double V = 0.0;
    double w = 0.0;
    double s_exc = 0.0;
    double s_inh = 0.0;

    bool operator==(const TraceSample&) const = default;
};

/// Uniformly sampled recording. Sample k is the state at t = k * dt; spike
/// times are step-end times and therefore always land on a sample.
struct SimulationTrace {
    double dt = 0.0;
    AdaptationQuantity w_quantity = AdaptationQuantity::current;
    std::vector<TraceSample> samples;
    std::vector<double> spikes;

    double time_of(std::size_t k) const { return static_cast<double>(k) * dt; }
    double duration() const {
        return samples.empty() ? 0.0 : time_of(samples.size() - 1);
    }
    std::vector<double> interspike_intervals() const;

    bool operator==(const SimulationTrace&) const = default;
};

} // namespace adexsim
