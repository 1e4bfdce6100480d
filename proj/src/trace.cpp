#include "adexsim/trace.hpp"

#include "adexsim/error.hpp"

namespace adexsim {

StimulusProgram::StimulusProgram(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty() || segments_.front().start != 0.0) {
        throw InvalidConfig("stimulus: first segment must start at t = 0");
    }
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (!(segments_[i].start > segments_[i - 1].start)) {
            throw InvalidConfig("stimulus: segment start times must be strictly increasing");
        }
    }
}

StimulusProgram StimulusProgram::constant(double current) {
    return StimulusProgram({{0.0, current}});
}

StimulusProgram StimulusProgram::step(double onset, double amplitude, double offset) {
    std::vector<Segment> segs;
    if (onset > 0.0) {
        segs.push_back({0.0, 0.0});
    }
    segs.push_back({onset > 0.0 ? onset : 0.0, amplitude});
    if (offset > onset) {
        segs.push_back({offset, 0.0});
    }
    return StimulusProgram(std::move(segs));
}

double StimulusProgram::current_at(double t) const {
    // Step starts computed as k*dt may sit a rounding error below a segment
    // boundary; treat those as already inside the segment.
    const double eps = 1e-12 * (t > 1.0 ? t : 1.0);
    double value = segments_.front().current;
    for (const auto& seg : segments_) {
        if (seg.start <= t + eps) {
            value = seg.current;
        } else {
            break;
        }
    }
    return value;
}

std::vector<double> SimulationTrace::interspike_intervals() const {
    std::vector<double> isi;
    for (std::size_t i = 1; i < spikes.size(); ++i) {
        isi.push_back(spikes[i] - spikes[i - 1]);
    }
    return isi;
}

} // namespace adexsim
