#include "harvest/analysis.hpp"
#include "harvest/transient.hpp"

#include <gtest/gtest.h>

#include <complex>

using namespace harvest;

namespace {

constexpr double kPi = std::numbers::pi;

struct SteadyState {
    double amplitude;
    double phase;
};

// Test-side closed form from the complex transfer function.
SteadyState steady_state(double wn, double zeta, double w, double y) {
    const auto h = w * w / std::complex<double>(wn * wn - w * w, 2.0 * zeta * wn * w);
    return {std::abs(h) * y, -std::arg(h)};
}

// Full response from rest: steady state plus the decaying homogeneous part.
double exact_from_rest(double wn, double zeta, double w, double y, double t) {
    const auto ss = steady_state(wn, zeta, w, y);
    const double wd = wn * std::sqrt(1.0 - zeta * zeta);
    const double a = ss.amplitude * std::sin(ss.phase);
    const double b = (zeta * wn * a - ss.amplitude * w * std::cos(ss.phase)) / wd;
    return ss.amplitude * std::sin(w * t - ss.phase) +
           std::exp(-zeta * wn * t) * (a * std::cos(wd * t) + b * std::sin(wd * t));
}

CoilCircuit no_coil() { return CoilCircuit{}; }

sim::SimConfig config_for(const GeneratorParams &g, double w) {
    return sim::recommended_config(g, no_coil(), w, w);
}

} // namespace

TEST(Simulate, ResonantAmplitudeMatchesClosedForm) {
    const double wn = 2.0 * kPi * 50.0;
    const auto g = make_generator(0.01, wn, 0.05);
    const Excitation e(1e-5, wn);
    const auto s = sim::simulate(g, no_coil(), e, config_for(g, wn));
    EXPECT_NEAR(s.z_amp_m, 1e-5 / (2.0 * 0.05), 0.005 * 1e-4);
    EXPECT_NEAR(s.phase_rad, kPi / 2.0, kPi / 180.0);
    EXPECT_LT(s.energy_balance_residual, 1e-3);
}

TEST(Simulate, HalfFrequencyAmplitudeMatchesClosedForm) {
    const double wn = 100.0;
    const auto g = make_generator(1.0, wn, 0.01);
    const double w = 0.5 * wn;
    const auto s = sim::simulate(g, no_coil(), Excitation(1e-3, w), config_for(g, w));
    const auto ref = steady_state(wn, 0.01, w, 1e-3);
    EXPECT_NEAR(s.z_amp_m, ref.amplitude, 0.005 * ref.amplitude);
    EXPECT_NEAR(s.phase_rad, ref.phase, kPi / 180.0);
}

TEST(Simulate, ZeroExcitationGivesZeroSummary) {
    const auto g = make_generator(1.0, 10.0, 0.05);
    CoilCircuit coil{100, 1e-2, 0.3, 10.0, 0.0, 10.0};
    const auto s = sim::simulate(g, coil, Excitation(0.0, 10.0), config_for(g, 10.0));
    EXPECT_EQ(s.z_amp_m, 0.0);
    EXPECT_EQ(s.v_rel_rms_m_per_s, 0.0);
    EXPECT_EQ(s.emf_rms_V, 0.0);
    EXPECT_EQ(s.p_load_avg_W, 0.0);
    EXPECT_EQ(s.p_parasitic_avg_W, 0.0);
    EXPECT_EQ(s.energy_balance_residual, 0.0);
}

TEST(Simulate, ElectricalOutputsMatchModel) {
    const double wn = hz_to_rad_per_s(350.0);
    const auto g = make_generator(4.4e-4, wn, 1.0 / 432.0);
    const CoilCircuit coil{400, 2.493176e-3, 0.41, 93.0, 0.0, 100.0};
    const Excitation e(0.62e-6, wn);
    const auto s = sim::simulate(g, coil, e, sim::recommended_config(g, coil, wn, wn));
    const auto m = evaluate_response(g, coil, e);

    EXPECT_NEAR(s.z_amp_m, m.z_amplitude_m, 0.005 * m.z_amplitude_m);
    EXPECT_NEAR(s.emf_rms_V, m.emf_rms_V, 0.005 * m.emf_rms_V);
    EXPECT_NEAR(s.p_load_avg_W, m.p_load_W, 0.01 * m.p_load_W);
    const double parasitic = m.p_dissipated_W - m.p_total_electrical_W;
    EXPECT_NEAR(s.p_parasitic_avg_W, parasitic, 0.01 * parasitic);
    EXPECT_LT(s.energy_balance_residual, 1e-3);
}

TEST(Simulate, OpenCircuitHasNoLoadPower) {
    const double wn = 500.0;
    const auto g = make_generator(1e-3, wn, 0.01);
    CoilCircuit coil{300, 3e-3, 0.4, 50.0, 0.0, std::numeric_limits<double>::infinity()};
    const auto s = sim::simulate(g, coil, Excitation(1e-6, wn), config_for(g, wn));
    EXPECT_EQ(s.p_load_avg_W, 0.0);
    // Sinusoidal steady state: RMS velocity = ω Z / √2.
    EXPECT_NEAR(s.emf_rms_V, coil.coupling() * wn * s.z_amp_m / std::numbers::sqrt2,
                0.005 * s.emf_rms_V);
}

TEST(Simulate, FourthOrderConvergence) {
    const double wn = 10.0, zeta = 0.05, w = 0.8 * wn, y = 1e-3;
    const auto g = make_generator(1.0, wn, zeta);
    const double period = kTwoPi / w;

    auto error_at = [&](int steps_per_period) {
        sim::SimConfig cfg;
        cfg.dt_s = period / steps_per_period;
        cfg.duration_s = 20.0 * period;
        cfg.settle_fraction = 0.8;
        cfg.record_trace = true;
        const auto s = sim::simulate(g, no_coil(), Excitation(y, w), cfg);
        // Sample at t = 5 periods, on the settling grid for both step sizes.
        const auto &p = s.trace[static_cast<std::size_t>(5 * steps_per_period)];
        EXPECT_NEAR(p.t_s, 5.0 * period, 1e-9);
        return std::abs(p.z_m - exact_from_rest(wn, zeta, w, y, p.t_s));
    };

    const double coarse = error_at(50);
    const double fine = error_at(100);
    EXPECT_GT(coarse, 0.0);
    EXPECT_GE(coarse / fine, 8.0) << "coarse " << coarse << " fine " << fine;
}

TEST(Simulate, SmallGridMatchesClosedForm) {
    const double wn = 1.0;
    for (double zeta : {0.002, 0.2}) {
        for (double ratio : {0.5, 1.0, 2.0}) {
            const auto g = make_generator(1.0, wn, zeta);
            const double w = ratio * wn;
            const auto s = sim::simulate(g, no_coil(), Excitation(1.0, w), config_for(g, w));
            const auto ref = steady_state(wn, zeta, w, 1.0);
            EXPECT_NEAR(s.z_amp_m, ref.amplitude, 0.005 * ref.amplitude)
                << "zeta " << zeta << " ratio " << ratio;
            EXPECT_NEAR(s.phase_rad, ref.phase, kPi / 180.0) << "zeta " << zeta << " ratio " << ratio;
        }
    }
}

TEST(Simulate, ShortHighQRunIsNotSettled) {
    const double wn = hz_to_rad_per_s(350.0);
    const auto g = make_generator(4.4e-4, wn, 0.0023);
    sim::SimConfig cfg;
    cfg.dt_s = kTwoPi / wn / 100.0;
    cfg.duration_s = 0.05;
    try {
        sim::simulate(g, no_coil(), Excitation(1e-6, wn), cfg);
        FAIL() << "expected NotSettledError";
    } catch (const NotSettledError &e) {
        EXPECT_GT(e.drift(), 0.01);
    }
}

TEST(Simulate, WarnsWhenHighQRunIsShort) {
    const double wn = 1.0;
    const auto g = make_generator(1.0, wn, 0.001); // Q = 500
    sim::SimConfig cfg;
    cfg.dt_s = kTwoPi / 100.0;
    cfg.duration_s = 9000.0; // below 10·2Q/ωn = 10000 but long enough to settle
    const auto s = sim::simulate(g, no_coil(), Excitation(1.0, 0.5), cfg);
    ASSERT_EQ(s.warnings.size(), 1u);
}

TEST(Simulate, ConfigPreconditions) {
    const auto g = make_generator(1.0, 10.0, 0.05);
    const Excitation e(1e-3, 10.0);
    sim::SimConfig coarse{kTwoPi / 10.0 / 40.0, 100.0, 0.8, false};
    EXPECT_THROW(sim::simulate(g, no_coil(), e, coarse), InvalidParameter);

    sim::SimConfig tiny_window{kTwoPi / 10.0 / 100.0, 2.0, 0.8, false};
    EXPECT_THROW(sim::simulate(g, no_coil(), e, tiny_window), PreconditionError);

    sim::SimConfig bad_settle{1e-3, 10.0, 1.0, false};
    EXPECT_THROW(sim::simulate(g, no_coil(), e, bad_settle), InvalidParameter);

    const auto undamped = make_generator(1.0, 10.0, 0.0);
    EXPECT_THROW(sim::simulate(undamped, no_coil(), e, sim::SimConfig{1e-3, 10.0, 0.8, false}),
                 PreconditionError);
}

// =============================================================================
// frequency_sweep_sim
// =============================================================================

TEST(FrequencySweepSim, SinglePointEqualsSimulate) {
    const double wn = 20.0;
    const auto g = make_generator(0.5, wn, 0.02);
    const TaggedAmplitude accel{1.0, AmplitudeConvention::peak};
    const auto cfg = config_for(g, wn);
    const std::vector<double> omegas{wn};
    const auto sweep = sim::frequency_sweep_sim(g, no_coil(), accel, omegas, cfg);
    ASSERT_EQ(sweep.size(), 1u);
    const auto single = sim::simulate(g, no_coil(), Excitation::from_acceleration(accel, wn), cfg);
    EXPECT_EQ(sweep[0].summary.z_amp_m, single.z_amp_m);
    EXPECT_EQ(sweep[0].summary.phase_rad, single.phase_rad);
}

TEST(FrequencySweepSim, AmplitudeRisesBelowResonance) {
    const double wn = 20.0;
    const auto g = make_generator(0.5, wn, 0.02);
    std::vector<double> omegas;
    for (int i = 0; i < 8; ++i)
        omegas.push_back(wn * (0.3 + 0.08 * i));
    const auto cfg = sim::recommended_config(g, no_coil(), omegas.front(), omegas.back());
    const auto sweep = sim::frequency_sweep_sim(g, no_coil(),
                                                {1.0, AmplitudeConvention::peak}, omegas, cfg);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        EXPECT_EQ(sweep[i].omega_rad_per_s, omegas[i]);
        EXPECT_GT(sweep[i].summary.z_amp_m, sweep[i - 1].summary.z_amp_m);
    }
}

TEST(FrequencySweepSim, OpenCircuitEmfCurveRecoversQ) {
    const double fn = 350.0;
    const auto g = make_generator(4.4e-4, hz_to_rad_per_s(fn), 0.0023);
    CoilCircuit coil{400, 2.493176e-3, 0.41, 93.0, 0.0, std::numeric_limits<double>::infinity()};
    std::vector<double> omegas;
    for (int i = 0; i < 81; ++i)
        omegas.push_back(hz_to_rad_per_s(fn - 8.0 + 16.0 * i / 80.0));
    const auto cfg = sim::recommended_config(g, coil, omegas.front(), omegas.back());
    const auto sweep =
        sim::frequency_sweep_sim(g, coil, {1.0, AmplitudeConvention::rms}, omegas, cfg);

    analysis::SweepCurve curve;
    curve.quantity = analysis::SweepQuantity::volts;
    curve.excitation_acceleration = {1.0, AmplitudeConvention::rms};
    for (const auto &p : sweep)
        curve.points.push_back({rad_per_s_to_hz(p.omega_rad_per_s), p.summary.emf_rms_V});
    const auto q = analysis::extract_q_half_power(curve);
    EXPECT_NEAR(q.q, 216.0, 0.02 * 216.0);
    EXPECT_NEAR(q.f_res_Hz, fn, 0.1);
}

TEST(FrequencySweepSim, FailuresCarryTheFrequency) {
    const auto g = make_generator(1.0, 10.0, 0.05);
    sim::SimConfig cfg{kTwoPi / 10.0 / 60.0, 200.0, 0.8, false};
    const std::vector<double> omegas{5.0, 10.0, 20.0}; // dt too coarse for 20 rad/s
    try {
        sim::frequency_sweep_sim(g, no_coil(), {1.0, AmplitudeConvention::peak}, omegas, cfg);
        FAIL() << "expected SweepPointError";
    } catch (const sim::SweepPointError &e) {
        EXPECT_EQ(e.omega(), 20.0);
        EXPECT_THROW(std::rethrow_exception(e.cause()), InvalidParameter);
    }

    const std::vector<double> unordered{10.0, 5.0};
    EXPECT_THROW(sim::frequency_sweep_sim(g, no_coil(), {1.0, AmplitudeConvention::peak},
                                          unordered, cfg),
                 InvalidParameter);
}
