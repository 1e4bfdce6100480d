#include "adexsim/classify.hpp"

#include "adexsim/error.hpp"
#include "adexsim/stats.hpp"

#include <algorithm>
#include <string>

namespace adexsim {

namespace {

constexpr FiringPatternLabel kLabels[] = {
    FiringPatternLabel::tonic_spiking,        FiringPatternLabel::adaptation,
    FiringPatternLabel::initial_burst,        FiringPatternLabel::regular_bursting,
    FiringPatternLabel::delayed_accelerating, FiringPatternLabel::delayed_regular_bursting,
    FiringPatternLabel::transient_spiking,    FiringPatternLabel::unclassified,
};

struct BurstSplit {
    bool bursting = false;
    double threshold = 0.0;  // ISIs <= threshold are intra-burst
};

// Largest ratio gap in the sorted ISIs.
BurstSplit split_bursts(const std::vector<double>& isi, double max_ratio) {
    std::vector<double> sorted = isi;
    std::sort(sorted.begin(), sorted.end());
    BurstSplit best;
    double best_ratio = 1.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double ratio = sorted[i] / sorted[i + 1];
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best.threshold = sorted[i];
        }
    }
    best.bursting = best_ratio < max_ratio;
    return best;
}

} // namespace

std::string_view label_name(FiringPatternLabel label) {
    switch (label) {
    case FiringPatternLabel::tonic_spiking: return "tonic_spiking";
    case FiringPatternLabel::adaptation: return "adaptation";
    case FiringPatternLabel::initial_burst: return "initial_burst";
    case FiringPatternLabel::regular_bursting: return "regular_bursting";
    case FiringPatternLabel::delayed_accelerating: return "delayed_accelerating";
    case FiringPatternLabel::delayed_regular_bursting: return "delayed_regular_bursting";
    case FiringPatternLabel::transient_spiking: return "transient_spiking";
    case FiringPatternLabel::unclassified: return "unclassified";
    }
    return "unclassified";
}

FiringPatternLabel parse_label(std::string_view name) {
    for (FiringPatternLabel l : kLabels) {
        if (label_name(l) == name) {
            return l;
        }
    }
    throw InvalidConfig("unknown firing pattern '" + std::string(name) + "'");
}

FiringPatternLabel classify_firing_pattern(std::span<const double> spikes, double stimulus_onset, double window,
                                           const ClassifierThresholds& th) {
    std::vector<double> s;
    for (double t : spikes) {
        if (t >= stimulus_onset && t <= stimulus_onset + window) {
            s.push_back(t - stimulus_onset);
        }
    }
    if (s.size() < 2) {
        return FiringPatternLabel::unclassified;
    }
    std::vector<double> isi;
    for (std::size_t i = 1; i < s.size(); ++i) {
        isi.push_back(s[i] - s[i - 1]);
    }
    const double mean_isi = mean(isi);

    if (s.size() >= th.transient_min_spikes && s.back() < th.transient_fraction * window) {
        return FiringPatternLabel::transient_spiking;
    }
    const BurstSplit bursts = split_bursts(isi, th.burst_ratio);
    if (s.front() / mean_isi > th.delay_ratio) {
        return bursts.bursting ? FiringPatternLabel::delayed_regular_bursting
                               : FiringPatternLabel::delayed_accelerating;
    }
    if (bursts.bursting) {
        std::size_t n_short = 0;
        while (n_short < isi.size() && isi[n_short] <= bursts.threshold) {
            ++n_short;
        }
        const bool short_only_at_start =
            std::none_of(isi.begin() + static_cast<std::ptrdiff_t>(n_short), isi.end(),
                         [&](double x) { return x <= bursts.threshold; });
        if (n_short > 0 && short_only_at_start && isi.size() - n_short >= 2) {
            return FiringPatternLabel::initial_burst;
        }
        return FiringPatternLabel::regular_bursting;
    }
    if (isi.size() >= 2 && coefficient_of_variation(isi) < th.tonic_cv) {
        return FiringPatternLabel::tonic_spiking;
    }
    if (isi.size() >= 2 && isi.back() > isi.front()) {
        const double slack = th.monotone_slack * mean_isi;
        bool monotone = true;
        for (std::size_t i = 1; i < isi.size(); ++i) {
            monotone = monotone && isi[i] >= isi[i - 1] - slack;
        }
        if (monotone) {
            return FiringPatternLabel::adaptation;
        }
    }
    return FiringPatternLabel::unclassified;
}

namespace {

template <class W>
std::vector<PhasePoint> polyline(const SimulationTrace& trace, W w_of) {
    std::vector<PhasePoint> out;
    for (const auto& s : trace.samples) {
        const PhasePoint p{s.V, w_of(s.w)};
        if (out.empty() || !(out.back() == p)) {
            out.push_back(p);
        }
    }
    return out;
}

} // namespace

std::vector<PhasePoint> phase_plane(const SimulationTrace& trace) {
    if (trace.w_quantity != AdaptationQuantity::current) {
        throw InvalidConfig("phase_plane: circuit traces need the adaptation circuit configuration");
    }
    return polyline(trace, [](double w) { return w; });
}

std::vector<PhasePoint> phase_plane(const SimulationTrace& trace, const AdaptationCircuitConfig& adaptation) {
    if (trace.w_quantity != AdaptationQuantity::voltage) {
        return phase_plane(trace);
    }
    return polyline(trace, [&](double V_w) { return adaptation.g_w() * (adaptation.V_ref - V_w); });
}

} // namespace adexsim
