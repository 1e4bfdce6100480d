#include "doctest.h"

#include "adexsim/adex.hpp"
#include "adexsim/error.hpp"
#include "adexsim/stats.hpp"
#include "adexsim/synapse.hpp"
#include "adexsim/units.hpp"

#include <cmath>
#include <random>

using namespace adexsim;
namespace u = adexsim::units;

namespace {

// Direct convolution of a spike train with an exponential kernel.
double convolved_trace(const std::vector<SpikeEvent>& events, double tau, double t) {
    double s = 0.0;
    for (const auto& e : events) {
        if (e.time <= t) {
            s += e.weight * std::exp(-(t - e.time) / tau);
        }
    }
    return s;
}

std::vector<double> run_trace(const WeightedSpikeTrain& train, double tau, double dt, std::size_t n) {
    ArrivalCursor cursor(train, dt);
    std::vector<double> out;
    double s = cursor.take(0);
    out.push_back(s);
    for (std::size_t k = 1; k < n; ++k) {
        s = trace_step(s, tau, dt, cursor.take(k));
        out.push_back(s);
    }
    return out;
}

WeightedSpikeTrain random_train(std::mt19937_64& rng, double dt, std::size_t n_steps, int count) {
    std::uniform_int_distribution<std::size_t> when(0, n_steps - 1);
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    std::vector<std::size_t> ks;
    for (int i = 0; i < count; ++i) {
        ks.push_back(when(rng));
    }
    std::sort(ks.begin(), ks.end());
    std::vector<SpikeEvent> ev;
    for (auto k : ks) {
        ev.push_back({static_cast<double>(k) * dt, weight(rng)});
    }
    return WeightedSpikeTrain(ev);
}

AdExParameters passive_membrane(double tau_m) {
    AdExParameters p;
    p.C = 2 * u::pF;
    p.g_l = p.C / tau_m;
    p.E_l = 0.4;
    p.V_r = 0.3;
    p.V_det = 5.0; // never reached
    p.exp_enabled = false;
    return p;
}

// Peak of the current-based PSP on a passive membrane for a unit jump of the
// trace: closed-form difference of exponentials, with the tau_s == tau_m limit.
double cuba_psp_peak(double I_hat, double C, double tau_m, double tau_s) {
    if (std::abs(tau_m - tau_s) < 1e-12 * tau_m) {
        return I_hat * tau_m / (C * std::exp(1.0));
    }
    const double t_peak = std::log(tau_s / tau_m) * tau_m * tau_s / (tau_s - tau_m);
    const double amp = I_hat * tau_m * tau_s / (C * (tau_s - tau_m));
    return amp * (std::exp(-t_peak / tau_s) - std::exp(-t_peak / tau_m));
}

} // namespace

TEST_CASE("trace step") {
    CHECK(trace_step(1.0, 2e-6, 2e-6, 0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(trace_step(0.3, 5e-6, 1e-7, 0.5 + 0.5) == trace_step(0.3, 5e-6, 1e-7, 1.0));
}

TEST_CASE("trace matches direct convolution") {
    std::mt19937_64 rng(11);
    const double tau = 3 * u::us;
    const double dt = 0.01 * u::us;
    const std::size_t n = 5000;
    const auto train = random_train(rng, dt, n, 40);
    const auto s = run_trace(train, tau, dt, n);
    for (std::size_t k = 0; k < n; k += 7) {
        const double ref = convolved_trace(train.events(), tau, static_cast<double>(k) * dt);
        if (ref > 1e-12) {
            CHECK(std::abs(s[k] - ref) / ref < 1e-9);
        }
        CHECK(s[k] >= 0.0);
    }
}

TEST_CASE("trace superposition") {
    std::mt19937_64 rng(5);
    const double tau = 1 * u::us;
    const double dt = 0.02 * u::us;
    const std::size_t n = 2000;
    const auto a = random_train(rng, dt, n, 15);
    const auto b = random_train(rng, dt, n, 25);
    std::vector<SpikeEvent> merged = a.events();
    merged.insert(merged.end(), b.events().begin(), b.events().end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const SpikeEvent& x, const SpikeEvent& y) { return x.time < y.time; });
    const auto sa = run_trace(a, tau, dt, n);
    const auto sb = run_trace(b, tau, dt, n);
    const auto sm = run_trace(WeightedSpikeTrain(merged), tau, dt, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double sum = sa[k] + sb[k];
        CHECK(std::abs(sm[k] - sum) <= 1e-9 * std::max(sum, 1e-300));
    }
}

TEST_CASE("events between boundaries land on the next boundary") {
    const double dt = 1e-7;
    CHECK(arrival_step(0.0, dt) == 0);
    CHECK(arrival_step(3 * dt, dt) == 3);
    CHECK(arrival_step(3.2 * dt, dt) == 4);
    CHECK_THROWS_AS(WeightedSpikeTrain({{2e-6, 1.0}, {1e-6, 1.0}}), InvalidConfig);
    CHECK_THROWS_AS(WeightedSpikeTrain({{1e-6, -1.0}}), InvalidConfig);
}

TEST_CASE("synaptic current") {
    SynapseConfig cuba{SynapseMode::cuba, 5e-6, 100e-9, 0.0, 0.0, SynapseSign::excitatory};
    SynapseConfig coba{SynapseMode::coba, 5e-6, 0.0, 1e-6, 1.1, SynapseSign::excitatory};
    CHECK(synaptic_current(0.0, cuba, 0.4) == 0.0);
    CHECK(synaptic_current(0.0, coba, 0.4) == 0.0);
    CHECK(synaptic_current(2.0, cuba, 0.4) == doctest::Approx(200e-9));
    cuba.sign = SynapseSign::inhibitory;
    CHECK(synaptic_current(2.0, cuba, 0.4) == doctest::Approx(-200e-9));
    CHECK(synaptic_current(0.7, coba, coba.E_syn) == 0.0);

    // Affine in V_m: slope -g_hat*s, intercept g_hat*s*E_syn.
    const double s = 0.8;
    std::vector<double> v, i;
    for (double V = 0.0; V <= 1.2; V += 0.05) {
        v.push_back(V);
        i.push_back(synaptic_current(s, coba, V));
    }
    const LinearFit fit = fit_line(v, i);
    CHECK(-fit.slope / s == doctest::Approx(coba.g_hat).epsilon(0.01));
    CHECK(fit.intercept / s == doctest::Approx(coba.g_hat * coba.E_syn).epsilon(0.01));

    SynapseConfig bad = cuba;
    bad.tau_syn = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("psp metrics") {
    SUBCASE("flat trace") {
        SimulationTrace t;
        t.dt = 1e-7;
        t.samples.assign(100, TraceSample{0.4, 0.0, 0.0, 0.0});
        const auto m = psp_metrics(t, 2e-6);
        CHECK(m.baseline == doctest::Approx(0.4));
        CHECK(std::abs(m.amplitude) < 1e-12);
        CHECK_THROWS_AS(psp_metrics(t, 5e-7), WindowTooShort);
    }
    SUBCASE("current-based PSP matches the closed-form peak") {
        for (auto [tau_m, tau_s] : {std::pair{10e-6, 2e-6}, std::pair{5e-6, 5e-6}, std::pair{3e-6, 8e-6}}) {
            const AdExParameters p = passive_membrane(tau_m);
            const SynapseConfig cfg{SynapseMode::cuba, tau_s, 20e-9, 0.0, 0.0, SynapseSign::excitatory};
            const double dt = std::min(tau_m, tau_s) / 1000;
            const double onset = 1e-6;
            const std::vector<SynapticInput> in{{cfg, WeightedSpikeTrain({{onset, 1.0}})}};
            const auto trace = simulate(p, StimulusProgram{}, in, onset + 10 * std::max(tau_m, tau_s), dt);
            const auto m = psp_metrics(trace, onset);
            const double expected = cuba_psp_peak(cfg.I_hat, p.C, tau_m, tau_s);
            CHECK(std::abs(m.amplitude - expected) / expected < 0.02);
            CHECK(m.baseline == doctest::Approx(p.E_l));
        }
    }
    SUBCASE("current-based PSP shape does not depend on the resting potential") {
        const SynapseConfig cfg{SynapseMode::cuba, 2e-6, 20e-9, 0.0, 0.0, SynapseSign::excitatory};
        const std::vector<SynapticInput> in{{cfg, WeightedSpikeTrain({{1e-6, 1.0}})}};
        AdExParameters lo = passive_membrane(10e-6);
        AdExParameters hi = lo;
        hi.E_l = 0.7;
        const auto a = simulate(lo, StimulusProgram{}, in, 40e-6, 1e-8);
        const auto b = simulate(hi, StimulusProgram{}, in, 40e-6, 1e-8);
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            CHECK((a.samples[k].V - lo.E_l) == doctest::Approx(b.samples[k].V - hi.E_l).epsilon(1e-9));
        }
    }
    SUBCASE("conductance-based PSP reverses at E_syn") {
        const SynapseConfig cfg{SynapseMode::coba, 2e-6, 0.0, 100e-9, 0.55, SynapseSign::excitatory};
        const std::vector<SynapticInput> in{{cfg, WeightedSpikeTrain({{1e-6, 1.0}})}};
        std::vector<double> hold, amp;
        for (double E = 0.3; E <= 0.8; E += 0.05) {
            AdExParameters p = passive_membrane(10e-6);
            p.E_l = E;
            const auto m = psp_metrics(simulate(p, StimulusProgram{}, in, 40e-6, 1e-8), 1e-6);
            hold.push_back(m.baseline);
            amp.push_back(m.amplitude);
        }
        const LinearFit fit = fit_line(hold, amp);
        CHECK(fit.r_squared > 0.999);
        CHECK(std::abs(fit.x_at_zero() - cfg.E_syn) < 2e-3);
    }
}
