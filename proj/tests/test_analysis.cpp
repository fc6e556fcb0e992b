#include "harvest/analysis.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace harvest;
using namespace harvest::analysis;

namespace {

// Displacement magnitude from the base-excitation response, generated
// directly from the frequency ratio (test-side oracle).
SweepCurve eq2_curve(double fn, double zeta, int points, double bandwidths) {
    const double half_span = 0.5 * bandwidths * (2.0 * zeta * fn);
    SweepCurve s;
    s.quantity = SweepQuantity::meters;
    s.excitation_acceleration = {1.0, AmplitudeConvention::peak};
    for (int i = 0; i < points; ++i) {
        const double f = fn - half_span + 2.0 * half_span * i / (points - 1);
        const double r = f / fn;
        const double mag = r * r / std::hypot(1.0 - r * r, 2.0 * zeta * r);
        s.points.push_back({f, mag});
    }
    return s;
}

SweepCurve from_values(std::vector<std::pair<double, double>> pts) {
    SweepCurve s;
    for (auto [f, m] : pts)
        s.points.push_back({f, m});
    return s;
}

DeviceRecord device(std::string name, double volume, double power, double accel) {
    DeviceRecord d;
    d.name = std::move(name);
    d.volume_mm3 = volume;
    d.active_mass_kg = 1e-3;
    d.resonant_frequency_Hz = 100.0;
    d.measured_power_W = power;
    d.measured_at_acceleration = {accel, AmplitudeConvention::rms};
    return d;
}

} // namespace

// =============================================================================
// extract_q_half_power
// =============================================================================

TEST(ExtractQ, RecoversCantileverOpenCircuitQ) {
    const auto q = extract_q_half_power(eq2_curve(350.0, 0.0023, 201, 10.0));
    EXPECT_NEAR(q.q, 216.0, 0.02 * 216.0);
    EXPECT_NEAR(q.f_res_Hz, 350.0, 0.05);
}

TEST(ExtractQ, RoundTripAcrossDampingRatios) {
    for (double zeta : {0.001, 0.0023, 0.01, 0.05}) {
        const auto q = extract_q_half_power(eq2_curve(1000.0, zeta, 201, 10.0));
        EXPECT_NEAR(q.q, 1.0 / (2.0 * zeta), 0.02 / (2.0 * zeta)) << "zeta " << zeta;
    }
}

TEST(ExtractQ, SymmetricTrianglePeak) {
    // Peak 1 at 3 Hz with zero neighbours: the parabola vertex stays at
    // (3, 1) and the 1/√2 crossings fall at 2 + 1/√2 and 4 − 1/√2.
    const auto q = extract_q_half_power(from_values({{1, 0}, {2, 0}, {3, 1}, {4, 0}, {5, 0}}));
    EXPECT_DOUBLE_EQ(q.f_res_Hz, 3.0);
    EXPECT_DOUBLE_EQ(q.peak_magnitude, 1.0);
    const double bw = 2.0 * (1.0 - 1.0 / std::numbers::sqrt2);
    EXPECT_NEAR(q.bandwidth_Hz, bw, 1e-12);
    EXPECT_NEAR(q.q, 5.121320343559642, 1e-12);
}

TEST(ExtractQ, PlateauUsesWidestPlateauMidpoint) {
    const auto q = extract_q_half_power(
        from_values({{1, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 0.5}, {6, 1}, {7, 0}}));
    EXPECT_DOUBLE_EQ(q.f_res_Hz, 3.0);
    EXPECT_DOUBLE_EQ(q.peak_magnitude, 1.0);
}

TEST(ExtractQ, Failures) {
    EXPECT_THROW(extract_q_half_power(from_values({{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}})),
                 PreconditionError);
    EXPECT_THROW(extract_q_half_power(from_values({{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}})),
                 PreconditionError);
    // Peak only slightly above the ends: the 1/√2 level is never crossed.
    EXPECT_THROW(extract_q_half_power(from_values({{1, 0.9}, {2, 0.95}, {3, 1}, {4, 0.95}, {5, 0.9}})),
                 BandwidthNotBracketed);
    EXPECT_THROW(extract_q_half_power(from_values({{1, 0}, {2, 1}, {3, 0}, {4, 0}})),
                 InvalidParameter);
    EXPECT_THROW(extract_q_half_power(from_values({{1, 0}, {3, 1}, {2, 0}, {4, 0}, {5, 0}})),
                 InvalidParameter);
}

// =============================================================================
// decompose_damping / estimate_mass_displacement
// =============================================================================

TEST(DecomposeDamping, Examples) {
    const auto d = decompose_damping(181.0, 216.0);
    EXPECT_NEAR(d.q_electrical, 1117.0, 1.0);
    EXPECT_NEAR(d.zeta_e, 0.00045, 1e-5);
    EXPECT_NEAR(d.zeta_p, 0.0023, 5e-5);

    EXPECT_THROW(decompose_damping(100.0, 100.0), PreconditionError);
    EXPECT_THROW(decompose_damping(120.0, 100.0), PreconditionError);

    const auto twice = decompose_damping(40.0, 80.0);
    EXPECT_NEAR(twice.q_electrical, 80.0, 1e-12);
}

TEST(DecomposeDamping, ConsistencyProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> q(1.0, 5000.0), frac(0.01, 0.99);
    for (int i = 0; i < 500; ++i) {
        const double open = q(rng);
        const double loaded = open * frac(rng);
        const auto d = decompose_damping(loaded, open);
        EXPECT_NEAR(1.0 / d.q_total, 1.0 / d.q_open_circuit + 1.0 / d.q_electrical,
                    1e-12 / d.q_total);
        EXPECT_NEAR(d.zeta_p + d.zeta_e, d.zeta_t, 1e-12 * d.zeta_t);
    }
}

TEST(MassDisplacement, Examples) {
    EXPECT_NEAR(estimate_mass_displacement(164.0, 1e-9), 164e-9, 1e-21);
    EXPECT_NEAR(estimate_mass_displacement(350.0, 0.62e-6), 217e-6, 1e-18);
    EXPECT_EQ(estimate_mass_displacement(300.0, 0.0), 0.0);
    EXPECT_THROW(estimate_mass_displacement(0.0, 1e-6), InvalidParameter);
}

// =============================================================================
// find_optimal_load
// =============================================================================

TEST(OptimalLoadSearch, WeakCouplingPeaksAtCoilResistance) {
    // Lumped model with zeta_p >> zeta_e: resonant load power over R_L.
    const double m = 4.4e-4, wn = hz_to_rad_per_s(350.0), y = 1e-6;
    const double zeta_p = 0.0023, r_coil = 93.0, coupling = 0.02;
    LoadSweep ls;
    for (int i = 0; i <= 120; ++i) {
        const double r = 10.0 * std::pow(100.0, i / 120.0);
        const double c_e = coupling * coupling / (r + r_coil);
        const double zeta_e = c_e / (2.0 * m * wn);
        const double zt = zeta_p + zeta_e;
        const double p_elec = m * zeta_e * y * y * wn * wn * wn / (4.0 * zt * zt);
        ls.points.push_back({r, p_elec * r / (r + r_coil), p_elec});
    }
    const auto opt = find_optimal_load(ls);
    EXPECT_TRUE(opt.bracketed);
    const double c_p = 2.0 * m * wn * zeta_p;
    EXPECT_NEAR(opt.r_opt_ohm, r_coil + coupling * coupling / c_p, 1.0);
    EXPECT_NEAR(opt.r_opt_ohm, r_coil, 0.02 * r_coil);
}

TEST(OptimalLoadSearch, TieBreakAndBoundary) {
    LoadSweep ties{{{10, 1, 2}, {20, 3, 4}, {40, 1, 2}, {80, 3, 4}, {160, 1, 2}}};
    const auto t = find_optimal_load(ties);
    EXPECT_TRUE(t.bracketed);
    EXPECT_NEAR(t.r_opt_ohm, 20.0, 1e-9);

    LoadSweep rising{{{10, 1, 2}, {20, 2, 3}, {40, 3, 4}}};
    const auto b = find_optimal_load(rising);
    EXPECT_FALSE(b.bracketed);
    EXPECT_EQ(b.r_opt_ohm, 40.0);

    EXPECT_THROW(find_optimal_load(LoadSweep{{{10, 1, 2}, {20, 2, 3}}}), InvalidParameter);
    EXPECT_THROW(find_optimal_load(LoadSweep{{{10, 1, 2}, {20, 5, 3}, {30, 1, 2}}}),
                 InvalidParameter);
}

// =============================================================================
// Normalisation and catalog comparison
// =============================================================================

TEST(NormalizePower, CatalogDevices) {
    const double pmg7 = normalize_power(3e-3, 0.5, 3.0);
    EXPECT_NEAR(pmg7, 108e-3, 1e-12);
    EXPECT_NEAR(pmg7 * 1e9 / 41300.0, 2615.0, 0.01 * 2615.0);

    const double lateral = normalize_power(122e-9, 3.5, 3.0);
    EXPECT_NEAR(lateral, 89.6e-9, 0.1e-9);
    EXPECT_NEAR(lateral * 1e9 / 68.0, 1.3, 0.05 * 1.3);

    EXPECT_EQ(normalize_power(2.5e-6, 3.0, 3.0), 2.5e-6);
    EXPECT_THROW(normalize_power(1.0, 0.0, 1.0), InvalidParameter);
}

TEST(NormalizePower, RoundTripIsIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lp(-12.0, 0.0), la(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = std::pow(10.0, lp(rng));
        const double a = std::pow(10.0, la(rng)), b = std::pow(10.0, la(rng));
        EXPECT_NEAR(normalize_power(normalize_power(p, a, b), b, a), p, 1e-12 * p);
    }
}

TEST(PowerDensity, Examples) {
    EXPECT_NEAR(power_density(device("cantilever", 60.0, 2.85e-6, 3.0),
                              {3.0, AmplitudeConvention::rms}),
                47.5, 1e-9);
    EXPECT_NEAR(power_density(device("pmg7", 41300.0, 3e-3, 0.5), {3.0, AmplitudeConvention::rms}),
                2615.0, 0.01 * 2615.0);
    EXPECT_EQ(power_density(device("dead", 10.0, 0.0, 1.0), {3.0, AmplitudeConvention::rms}), 0.0);
    // Mixed conventions are reconciled through the peak value.
    EXPECT_NEAR(power_density(device("x", 1.0, 1e-9, 1.0), {1.0, AmplitudeConvention::peak}), 0.5,
                1e-12);
}

TEST(CompareCatalog, OrderingAndTies) {
    const std::vector<DeviceRecord> bundled{device("lateral", 68.0, 122e-9, 3.5),
                                          device("pmg7", 41300.0, 3e-3, 0.5),
                                          device("cantilever", 60.0, 2.85e-6, 3.0)};
    const auto rows = compare_catalog(bundled, {3.0, AmplitudeConvention::rms});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].name, "pmg7");
    EXPECT_EQ(rows[1].name, "cantilever");
    EXPECT_EQ(rows[2].name, "lateral");
    EXPECT_EQ(rows[2].measured_power_W, 122e-9);

    EXPECT_EQ(compare_catalog({device("solo", 1.0, 1e-6, 1.0)}, {1.0, AmplitudeConvention::rms}).size(),
              1u);

    const auto tied = compare_catalog({device("b", 1.0, 1e-6, 1.0), device("a", 1.0, 1e-6, 1.0)},
                                      {1.0, AmplitudeConvention::rms});
    EXPECT_EQ(tied[0].name, "a");
    EXPECT_EQ(tied[1].name, "b");

    EXPECT_THROW(compare_catalog({}, {1.0, AmplitudeConvention::rms}), InvalidParameter);
}

TEST(CompareCatalog, OrderInvariantUnderCommonAccelerationRescale) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lv(0.0, 5.0), lp(-9.0, -2.0), la(-1.0, 1.0),
        scale(0.1, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<DeviceRecord> recs;
        for (int i = 0; i < 6; ++i)
            recs.push_back(device("d" + std::to_string(i), std::pow(10.0, lv(rng)),
                                  std::pow(10.0, lp(rng)), std::pow(10.0, la(rng))));
        const auto base = compare_catalog(recs, {3.0, AmplitudeConvention::rms});
        const double s = scale(rng);
        for (auto &r : recs)
            r.measured_at_acceleration.value *= s;
        const auto scaled = compare_catalog(recs, {3.0, AmplitudeConvention::rms});
        for (std::size_t i = 0; i < base.size(); ++i)
            EXPECT_EQ(base[i].name, scaled[i].name);
    }
}
