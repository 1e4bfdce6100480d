#include "doctest.h"

#include "adexsim/adex.hpp"
#include "adexsim/error.hpp"
#include "adexsim/stats.hpp"
#include "adexsim/units.hpp"

#include <cmath>
#include <random>

using namespace adexsim;
namespace u = adexsim::units;

namespace {

// Tonic-spiking set from the AdEx firing-pattern literature, biological units.
AdExParameters naud_tonic() {
    AdExParameters p;
    p.C = 200 * u::pF;
    p.g_l = 10 * u::nS;
    p.E_l = -70 * u::mV;
    p.V_T = -50 * u::mV;
    p.Delta_T = 2 * u::mV;
    p.a = 2 * u::nS;
    p.tau_w = 30 * u::ms;
    p.b = 0.0;
    p.V_r = -58 * u::mV;
    p.V_det = -30 * u::mV;
    return p;
}

AdExParameters lif(double tau_m, double E_l, double V_r, double V_det, double t_ref = 0.0) {
    AdExParameters p;
    p.C = 2 * u::pF;
    p.g_l = p.C / tau_m;
    p.E_l = E_l;
    p.V_r = V_r;
    p.V_det = V_det;
    p.t_ref = t_ref;
    p.exp_enabled = false;
    p.a = 0.0;
    p.b = 0.0;
    return p;
}

// Second, independent evaluation of the membrane equation in long double.
long double membrane_rhs_reference(long double V, long double w, long double I, const AdExParameters& p) {
    const long double leak = -static_cast<long double>(p.g_l) * (V - p.E_l);
    const long double expo = static_cast<long double>(p.g_l) * p.Delta_T * std::exp((V - p.V_T) / p.Delta_T);
    return (leak + expo - w + I) / p.C;
}

} // namespace

TEST_CASE("membrane derivative") {
    SUBCASE("leak fixed point") {
        AdExParameters p = naud_tonic();
        p.exp_enabled = false;
        CHECK(membrane_derivative({p.E_l, 0.0, 0.0}, p, 0.0) == 0.0);
    }
    SUBCASE("exponent zero at V_T") {
        AdExParameters p = naud_tonic();
        p.E_l = p.V_T;
        CHECK(membrane_derivative({p.V_T, 0.0, 0.0}, p, 0.0) == doctest::Approx(p.g_l * p.Delta_T / p.C));
    }
    SUBCASE("matches independent evaluation") {
        const AdExParameters p = naud_tonic();
        for (double w : {0.0, 50e-12, -20e-12}) {
            for (double I : {0.0, 500e-12}) {
                const double got = membrane_derivative({-50 * u::mV, w, 0.0}, p, I);
                const double ref = static_cast<double>(membrane_rhs_reference(-50e-3L, w, I, p));
                CHECK(got == doctest::Approx(ref).epsilon(1e-12));
            }
        }
    }
    SUBCASE("exponential gated during refractory period") {
        AdExParameters p = naud_tonic();
        p.t_ref = 1 * u::ms;
        const NeuronState refractory{p.V_T, 0.0, 0.5 * u::ms};
        CHECK(exponential_current(refractory, p) == 0.0);
        p.exp_gated_in_ref = false;
        CHECK(exponential_current(refractory, p) == doctest::Approx(p.g_l * p.Delta_T));
    }
    SUBCASE("exponent clamped") {
        const AdExParameters p = naud_tonic();
        const double far = exponential_current({p.V_T + 100 * p.Delta_T, 0.0, 0.0}, p);
        CHECK(std::isfinite(far));
        CHECK(far == doctest::Approx(p.g_l * p.Delta_T * std::exp(kExpArgumentClamp)));
    }
}

TEST_CASE("adaptation derivative") {
    AdExParameters p = naud_tonic();
    CHECK(adaptation_derivative({p.E_l, 0.0, 0.0}, p) == 0.0);
    p.a = 0.0;
    CHECK(adaptation_derivative({-60 * u::mV, 30e-12, 0.0}, p) == doctest::Approx(-30e-12 / p.tau_w));
    p.a = 4 * u::nS;
    p.tau_w = 144 * u::ms;
    CHECK(adaptation_derivative({p.E_l + 10 * u::mV, 0.0, 0.0}, p) ==
          doctest::Approx(40e-12 / (144 * u::ms)));
}

TEST_CASE("spike reset") {
    AdExParameters p = naud_tonic();
    p.b = 50 * u::pA;
    p.t_ref = 2 * u::ms;
    const NeuronState s = apply_spike_reset({p.V_det, 0.0, 0.0}, p);
    CHECK(s.V == p.V_r);
    CHECK(s.w == doctest::Approx(50e-12));
    CHECK(s.ref_remaining == p.t_ref);
    CHECK(apply_spike_reset(s, p).w == doctest::Approx(100e-12));
    p.b = 0.0;
    CHECK(apply_spike_reset({p.V_det, 7e-12, 0.0}, p).w == 7e-12);
}

TEST_CASE("step") {
    SUBCASE("resting state is stationary") {
        AdExParameters p = naud_tonic();
        p.exp_enabled = false;
        NeuronState s = resting_state(p);
        for (double dt : {1e-6, 1e-5, 1e-4, 1e-3}) {
            const auto r = step(s, p, 0.0, dt);
            CHECK(r.state.V == doctest::Approx(p.E_l).epsilon(1e-14));
            CHECK(std::abs(r.state.w) < 1e-24);
            CHECK_FALSE(r.spiked);
        }
    }
    SUBCASE("refractory clamp holds V and lets w relax") {
        AdExParameters p = naud_tonic();
        p.t_ref = 1 * u::ms;
        NeuronState s{p.V_r, 100e-12, p.t_ref};
        const auto r = step(s, p, 1e-9, 0.1 * u::ms);
        CHECK(r.state.V == p.V_r);
        CHECK(r.state.w < s.w);
        CHECK(r.state.ref_remaining == doctest::Approx(0.9 * u::ms));
    }
    SUBCASE("rejects non-positive dt") {
        CHECK_THROWS_AS(step({}, naud_tonic(), 0.0, 0.0), InvalidConfig);
    }
    SUBCASE("non-finite drive is reported") {
        const AdExParameters p = naud_tonic();
        CHECK_THROWS_AS(step(resting_state(p), p, INFINITY, 1e-5), NonFiniteState);
    }
    SUBCASE("LIF spike times follow the closed form") {
        const double tau = 10 * u::us;
        const AdExParameters p = lif(tau, 1.0, 0.4, 0.8);
        const double dt = tau / 1000;
        SimulationOptions from_reset;
        from_reset.use_initial = true;
        from_reset.initial = {p.V_r, 0.0, 0.0};
        const auto trace = simulate(p, StimulusProgram{}, {}, 20 * tau, dt, from_reset);
        REQUIRE(trace.spikes.size() >= 3);
        const double expected = tau * std::log(3.0);
        for (double isi : trace.interspike_intervals()) {
            CHECK(std::abs(isi - expected) / expected < 0.005);
        }
        CHECK(std::abs(trace.spikes.front() - expected) / expected < 0.005);
    }
}

namespace {

// Mean ISI of a spiking adaptive configuration (biological units).
double adapting_mean_isi(double dt) {
    AdExParameters p = naud_tonic();
    p.g_l = 12 * u::nS;
    p.a = 2 * u::nS;
    p.b = 60 * u::pA;
    p.tau_w = 300 * u::ms;
    const auto trace = simulate(p, StimulusProgram::constant(500 * u::pA), {}, 300 * u::ms, dt,
                                {.record = false});
    const auto isi = trace.interspike_intervals();
    return mean(isi);
}

} // namespace

TEST_CASE("integration order on a spiking configuration") {
    const double reference = adapting_mean_isi(0.05 * u::us);
    std::vector<double> log_dt, log_err;
    for (double dt = 20 * u::us; dt >= 0.6 * u::us; dt /= 2) {
        const double err = std::abs(adapting_mean_isi(dt) - reference);
        log_dt.push_back(std::log2(dt));
        log_err.push_back(std::log2(err));
        MESSAGE("dt=" << dt << " err=" << err);
    }
    const LinearFit fit = fit_line(log_dt, log_err);
    MESSAGE("measured order " << fit.slope);
    CHECK(std::abs(fit.slope - kSchemeOrder) <= 0.3);
}

TEST_CASE("simulate") {
    SUBCASE("no input keeps the neuron at rest") {
        AdExParameters p = naud_tonic();
        p.exp_enabled = false;
        const auto trace = simulate(p, StimulusProgram{}, {}, 50 * u::ms, 0.1 * u::ms);
        CHECK(trace.spikes.empty());
        CHECK(trace.samples.size() == 501);
        for (const auto& s : trace.samples) {
            CHECK(s.V == doctest::Approx(p.E_l).epsilon(1e-14));
            CHECK(s.w == 0.0);
        }
    }
    SUBCASE("tonic set settles to a constant interval") {
        const AdExParameters p = naud_tonic();
        const auto coarse = simulate(p, StimulusProgram::constant(500 * u::pA), {}, 1000 * u::ms, 10 * u::us);
        const auto fine = simulate(p, StimulusProgram::constant(500 * u::pA), {}, 1000 * u::ms, 1 * u::us);
        auto isi = coarse.interspike_intervals();
        REQUIRE(isi.size() > 10);
        const std::vector<double> tail(isi.begin() + 1, isi.end());
        CHECK(coefficient_of_variation(tail) < 0.01);
        // Steady interval agrees with a ten times finer integration.
        const double steady = isi.back();
        const double steady_fine = fine.interspike_intervals().back();
        CHECK(std::abs(steady - steady_fine) / steady_fine < 0.01);
    }
    SUBCASE("reset contract") {
        AdExParameters p = naud_tonic();
        p.b = 40 * u::pA;
        p.t_ref = 0.5 * u::ms;
        const double dt = 10 * u::us;
        const auto trace = simulate(p, StimulusProgram::constant(500 * u::pA), {}, 200 * u::ms, dt);
        REQUIRE(trace.spikes.size() > 3);
        for (double t : trace.spikes) {
            const auto k = static_cast<std::size_t>(std::llround(t / dt));
            CHECK(trace.samples[k].V == p.V_r);
            // w just before the reset, advanced by one step without the jump.
            NeuronState before{trace.samples[k - 1].V, trace.samples[k - 1].w, 0.0};
            const double w_inf = p.a * (before.V - p.E_l);
            const double w_pre = w_inf + (before.w - w_inf) * std::exp(-dt / p.tau_w);
            CHECK(trace.samples[k].w - w_pre == doctest::Approx(p.b).epsilon(1e-9));
        }
        for (std::size_t i = 1; i < trace.spikes.size(); ++i) {
            CHECK(trace.spikes[i] > trace.spikes[i - 1]);
        }
    }
    SUBCASE("refractory period lengthens the interval by t_ref") {
        const double tau = 10 * u::us;
        AdExParameters p = lif(tau, 1.0, 0.4, 0.8, 2 * u::us);
        const auto trace = simulate(p, StimulusProgram{}, {}, 30 * tau, tau / 1000);
        const double predicted = predicted_lot_isi(p, 0.0);
        CHECK(predicted == doctest::Approx(2 * u::us + tau * std::log(3.0)));
        CHECK(std::abs(mean(trace.interspike_intervals()) - predicted) / predicted < 0.005);
    }
    SUBCASE("bit-identical reruns") {
        AdExParameters p = naud_tonic();
        p.b = 60 * u::pA;
        const auto a = simulate(p, StimulusProgram::step(20 * u::ms, 500 * u::pA), {}, 200 * u::ms, 10 * u::us);
        const auto b = simulate(p, StimulusProgram::step(20 * u::ms, 500 * u::pA), {}, 200 * u::ms, 10 * u::us);
        CHECK(a == b);
    }
    SUBCASE("invalid parameters are rejected") {
        AdExParameters p = naud_tonic();
        p.tau_w = 0.0;
        CHECK_THROWS_AS(simulate(p, StimulusProgram{}, {}, 1e-3, 1e-6), InvalidConfig);
        p = naud_tonic();
        p.V_det = p.V_T - 1e-3;
        CHECK_THROWS_AS(simulate(p, StimulusProgram{}, {}, 1e-3, 1e-6), InvalidConfig);
        CHECK_THROWS_AS(simulate(naud_tonic(), StimulusProgram{}, {}, 0.0, 1e-6), InvalidConfig);
    }
}

TEST_CASE("predicted leak-over-threshold interval") {
    SUBCASE("arithmetic example") {
        const AdExParameters p = lif(10 * u::us, 1.0, 0.4, 0.8);
        CHECK(predicted_lot_isi(p, 0.0) == doctest::Approx(10e-6 * std::log(3.0)));
    }
    SUBCASE("strong drive approaches t_ref") {
        const AdExParameters p = lif(10 * u::us, 0.3, 0.4, 0.8, 1 * u::us);
        const double big = predicted_lot_isi(p, 1e3 * p.g_l);
        CHECK(big == doctest::Approx(1e-6).epsilon(1e-3));
    }
    SUBCASE("reset at detection") {
        const AdExParameters p = lif(10 * u::us, 1.0, 0.8, 0.8, 1 * u::us);
        CHECK(predicted_lot_isi(p, 0.0) == doctest::Approx(1e-6));
    }
    SUBCASE("subthreshold drive is rejected") {
        const AdExParameters p = lif(10 * u::us, 0.5, 0.4, 0.8);
        CHECK_THROWS_AS(predicted_lot_isi(p, 0.0), NotLeakOverThreshold);
        CHECK_THROWS_AS(predicted_lot_isi(naud_tonic(), 0.0), InvalidConfig);
    }
}

TEST_CASE("leak-over-threshold properties") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> tau_d(std::log(1e-6), std::log(500e-6));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double tau = std::exp(tau_d(rng));
        const double V_r = 0.2 + 0.2 * unit(rng);
        const double V_det = V_r + 0.1 + 0.3 * unit(rng);
        const double E_l = 0.1 + 0.2 * unit(rng);
        AdExParameters p = lif(tau, E_l, V_r, V_det);
        const double gap = V_det - V_r;
        const double I_ext = p.g_l * (V_det - E_l + gap * (0.1 + 1.9 * unit(rng)));
        const auto trace = simulate(p, StimulusProgram::constant(I_ext), {}, 0.0 + 8 * tau, tau / 500,
                                    {.record = false, .initial = {V_r, 0.0, 0.0}, .use_initial = true});
        const double predicted = predicted_lot_isi(p, I_ext);
        REQUIRE(trace.spikes.size() >= 2);
        CHECK(std::abs(mean(trace.interspike_intervals()) - predicted) / predicted < 0.01);

        // A larger drive shortens the interval.
        const auto faster = simulate(p, StimulusProgram::constant(I_ext * 1.1), {}, 8 * tau, tau / 500,
                                     {.record = false, .initial = {V_r, 0.0, 0.0}, .use_initial = true});
        CHECK(mean(faster.interspike_intervals()) < mean(trace.interspike_intervals()));
    }
}

TEST_CASE("domain mapping preserves dimensionless dynamics") {
    const AdExParameters bio = naud_tonic();
    DomainMapping m;
    double i_scale = 0.0;
    const AdExParameters hw = to_hardware(bio, m, &i_scale);
    CHECK(hw.tau_m() == doctest::Approx(bio.tau_m() / 1000));
    CHECK(hw.V_T == doctest::Approx(0.5));
    CHECK(hw.Delta_T == doctest::Approx(20e-3));
    const auto tb = simulate(bio, StimulusProgram::constant(500 * u::pA), {}, 200 * u::ms, 5 * u::us);
    const auto th = simulate(hw, StimulusProgram::constant(500 * u::pA * i_scale), {}, 200 * u::us, 5e-9);
    REQUIRE(tb.spikes.size() == th.spikes.size());
    for (std::size_t i = 0; i < tb.spikes.size(); ++i) {
        CHECK(hardware_time_to_bio(th.spikes[i], m) == doctest::Approx(tb.spikes[i]).epsilon(1e-6));
    }
}
