// Time-domain integration of the base-excited generator
//
//     m z'' + c_T z' + k z = -m y'',   y(t) = Y sin(ωt)
//
// started from rest, with c_T = c_p + c_e held constant (linear model).
// Energy flows and the sin/cos projections of z are integrated alongside the
// motion so window averages and the energy balance carry the integrator's
// own accuracy.
#pragma once

#include "harvest/errors.hpp"
#include "harvest/model.hpp"
#include "harvest/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace harvest::sim {

struct SimConfig {
    double dt_s = 0.0;
    double duration_s = 0.0;
    double settle_fraction = 0.8; ///< leading share of the run excluded from statistics
    bool record_trace = false;
};

struct TraceSample {
    double t_s;
    double z_m;
    double zdot_m_s;
    double emf_v;
    double p_load_w;
};

struct TraceSummary {
    double z_amp_m = 0.0;
    double phase_rad = 0.0;
    double v_rel_rms_m_per_s = 0.0;
    double emf_rms_V = 0.0;
    double p_load_avg_W = 0.0;
    double p_parasitic_avg_W = 0.0;
    double energy_balance_residual = 0.0;
    std::vector<std::string> warnings;
    std::vector<TraceSample> trace; ///< filled only when SimConfig::record_trace
};

inline constexpr int kMinStepsPerPeriod = 50;
inline constexpr double kMaxSettleDrift = 0.01;
inline constexpr double kMaxEnergyResidual = 1e-3;

inline void validate(const SimConfig &cfg, double omega_rad_per_s) {
    detail::require(std::isfinite(cfg.dt_s) && cfg.dt_s > 0.0, "dt_s must be > 0");
    detail::require(std::isfinite(cfg.duration_s) && cfg.duration_s > 10.0 * cfg.dt_s,
                    "duration_s must exceed 10 steps");
    detail::require(cfg.settle_fraction >= 0.0 && cfg.settle_fraction < 1.0,
                    "settle_fraction must lie in [0, 1)");
    detail::require(cfg.dt_s <= kTwoPi / omega_rad_per_s / kMinStepsPerPeriod,
                    "dt_s must resolve at least 50 steps per forcing period");
}

/// A config that settles the given system: the run spans at least twelve
/// decay time constants 1/(ζ_T ωn) and twenty forcing periods, with
/// `steps_per_period` steps over the shortest period of interest.
inline SimConfig recommended_config(const GeneratorParams &g, const CoilCircuit &c,
                                    double omega_min, double omega_max,
                                    int steps_per_period = 100) {
    detail::require(omega_min > 0.0 && omega_max >= omega_min, "invalid frequency range");
    detail::require(steps_per_period >= kMinStepsPerPeriod, "too few steps per period");
    const double wn = natural_frequency(g);
    const double zeta_min =
        g.zeta_parasitic +
        std::min(damping_ratio_from_coefficient(em_damping_coefficient(c, omega_min), g),
                 damping_ratio_from_coefficient(em_damping_coefficient(c, omega_max), g));
    detail::require_precondition(zeta_min > 0.0, "total damping ratio must be > 0");

    SimConfig cfg;
    cfg.dt_s = kTwoPi / std::max(omega_max, wn) / steps_per_period;
    cfg.duration_s = std::max(12.0 / (zeta_min * wn), 20.0 * kTwoPi / omega_min);
    return cfg;
}

namespace detail {

// z, z', input work, parasitic loss, electrical loss, ∫z sin, ∫z cos, ∫z'^2
using SimState = StateVector<8>;

// Vertex of the parabola through three equally spaced samples around i.
inline double refine_extremum(const std::vector<double> &z, std::size_t i) {
    if (i == 0 || i + 1 >= z.size())
        return z[i];
    const double a = z[i - 1], b = z[i], c = z[i + 1];
    const double curvature = a - 2.0 * b + c;
    if (curvature == 0.0)
        return b;
    return b - (a - c) * (a - c) / (8.0 * curvature);
}

} // namespace detail

/// Integrates the generator from rest and summarises the steady state found
/// in the final `1 - settle_fraction` of the run.
///
/// The statistics window is a whole number of forcing periods ending at
/// `duration_s`; it is integrated with a step no larger than `dt_s` that
/// divides the period exactly. Per-period amplitudes come from the refined
/// extremes of z; a drift above 1% between the last two periods raises
/// NotSettledError.
inline TraceSummary simulate(const GeneratorParams &g, const CoilCircuit &c, const Excitation &e,
                             const SimConfig &cfg) {
    validate(g);
    validate(c);
    const double w = e.omega_rad_per_s();
    validate(cfg, w);

    const double m = g.mass_kg;
    const double k = g.stiffness_N_per_m;
    const double wn = natural_frequency(g);
    const double c_p = damping_coefficient_from_ratio(g.zeta_parasitic, g);
    const double c_e = em_damping_coefficient(c, w);
    const double c_t = c_p + c_e;
    const double zeta_t = damping_ratio_from_coefficient(c_t, g);
    harvest::detail::require_precondition(zeta_t > 0.0 && zeta_t < 1.0,
                                          "total damping ratio must lie in (0, 1)");

    const double force_amp = m * w * w * e.amplitude_m();
    const double phi = c.coupling();
    const double load_share = c.open_circuit() ? 0.0 : c.r_load_ohm / (c.r_load_ohm + c.r_coil_ohm);
    const double period = kTwoPi / w;

    TraceSummary out;
    const double q = 1.0 / (2.0 * zeta_t);
    if (q > 200.0 && cfg.duration_s < 10.0 * 2.0 * q / wn)
        out.warnings.push_back("duration below 10*(2Q/wn) for a Q > 200 system; "
                               "settling may be incomplete");

    const int window_periods =
        static_cast<int>(std::floor((1.0 - cfg.settle_fraction) * cfg.duration_s / period));
    harvest::detail::require_precondition(
        window_periods >= 2, "statistics window must hold at least two forcing periods");
    const double window_len = window_periods * period;
    const double t_window = cfg.duration_s - window_len;

    auto rhs = [&](const detail::SimState &x, double t) {
        const double s = std::sin(w * t);
        const double force = force_amp * s;
        const double z = x[0], v = x[1];
        return detail::SimState{v,
                                (force - c_t * v - k * z) / m,
                                force * v,
                                c_p * v * v,
                                c_e * v * v,
                                z * s,
                                z * std::cos(w * t),
                                v * v};
    };
    auto record = [&](double t, const detail::SimState &x) {
        if (cfg.record_trace)
            out.trace.push_back({t, x[0], x[1], phi * x[1], load_share * c_e * x[1] * x[1]});
    };

    detail::SimState x{};
    double t = 0.0;
    record(t, x);

    // Settling phase on the caller's grid, closed by a partial step onto t_window.
    const auto full_steps = static_cast<long long>(std::floor(t_window / cfg.dt_s));
    for (long long i = 0; i < full_steps; ++i) {
        rk4_step(rhs, x, t, cfg.dt_s);
        t = static_cast<double>(i + 1) * cfg.dt_s;
        record(t, x);
    }
    if (const double rest = t_window - t; rest > 1e-12 * cfg.dt_s) {
        rk4_step(rhs, x, t, rest);
        t = t_window;
        record(t, x);
    }
    t = t_window;
    const detail::SimState at_window = x;

    // Statistics window: whole periods, each split into steps_per exact steps.
    const int steps_per = static_cast<int>(std::ceil(period / cfg.dt_s - 1e-9));
    const double h = period / steps_per;
    std::vector<double> zs;
    zs.reserve(static_cast<std::size_t>(window_periods) * steps_per + 1);
    zs.push_back(x[0]);
    for (int p = 0; p < window_periods; ++p) {
        for (int i = 0; i < steps_per; ++i) {
            rk4_step(rhs, x, t, h);
            t = t_window + (static_cast<double>(p) * steps_per + i + 1) * h;
            zs.push_back(x[0]);
            record(t, x);
        }
    }

    std::vector<double> amplitudes;
    for (int p = 0; p < window_periods; ++p) {
        const auto first = zs.begin() + static_cast<std::ptrdiff_t>(p) * steps_per;
        const auto last = first + steps_per + 1;
        const auto [lo, hi] = std::minmax_element(first, last);
        const double zmax = detail::refine_extremum(zs, static_cast<std::size_t>(hi - zs.begin()));
        const double zmin = detail::refine_extremum(zs, static_cast<std::size_t>(lo - zs.begin()));
        amplitudes.push_back(0.5 * (zmax - zmin));
    }
    const double last_amp = amplitudes.back();
    const double prev_amp = amplitudes[amplitudes.size() - 2];
    const double drift = last_amp > 0.0 ? std::abs(last_amp - prev_amp) / last_amp : 0.0;
    if (drift > kMaxSettleDrift)
        throw NotSettledError("simulation not settled: amplitude drifted " +
                                  std::to_string(100.0 * drift) +
                                  "% over the last period; extend duration_s",
                              drift);

    out.z_amp_m = last_amp;
    const double sin_proj = 2.0 / window_len * (x[5] - at_window[5]);
    const double cos_proj = 2.0 / window_len * (x[6] - at_window[6]);
    if (sin_proj != 0.0 || cos_proj != 0.0) {
        out.phase_rad = std::atan2(-cos_proj, sin_proj);
        if (out.phase_rad < -0.5 * std::numbers::pi)
            out.phase_rad += kTwoPi;
    }
    out.v_rel_rms_m_per_s = std::sqrt((x[7] - at_window[7]) / window_len);
    out.emf_rms_V = phi * out.v_rel_rms_m_per_s;
    out.p_load_avg_W = load_share * (x[4] - at_window[4]) / window_len;
    out.p_parasitic_avg_W = (x[3] - at_window[3]) / window_len;

    const double mechanical = 0.5 * m * x[1] * x[1] + 0.5 * k * x[0] * x[0];
    const double scale = std::max(std::abs(x[2]), x[3] + x[4] + mechanical);
    out.energy_balance_residual =
        scale > 0.0 ? std::abs(x[2] - x[3] - x[4] - mechanical) / scale : 0.0;
    harvest::detail::require_precondition(out.energy_balance_residual < kMaxEnergyResidual,
                                          "energy balance residual exceeds 1e-3; reduce dt_s");
    return out;
}

// =============================================================================
// Frequency sweeps
// =============================================================================

/// A sweep point failed; the original exception is kept as `cause()`.
class SweepPointError : public std::runtime_error {
public:
    SweepPointError(double omega, const std::string &what, std::exception_ptr cause)
        : std::runtime_error("at omega = " + std::to_string(omega) + " rad/s: " + what),
          omega_(omega), cause_(std::move(cause)) {}

    double omega() const noexcept { return omega_; }
    std::exception_ptr cause() const noexcept { return cause_; }

private:
    double omega_;
    std::exception_ptr cause_;
};

struct SweepSimPoint {
    double omega_rad_per_s;
    TraceSummary summary;
};

/// One simulate() per drive frequency at a constant base acceleration, as a
/// shaker-driven sweep would be run. Points run concurrently; results keep
/// the input order.
inline std::vector<SweepSimPoint> frequency_sweep_sim(const GeneratorParams &g,
                                                      const CoilCircuit &c,
                                                      TaggedAmplitude acceleration,
                                                      std::span<const double> omegas,
                                                      const SimConfig &cfg) {
    harvest::detail::require(!omegas.empty(), "sweep needs at least one frequency");
    for (std::size_t i = 1; i < omegas.size(); ++i)
        harvest::detail::require(omegas[i] > omegas[i - 1], "sweep frequencies must be strictly increasing");

    auto run_point = [&](double w) {
        try {
            return SweepSimPoint{w, simulate(g, c, Excitation::from_acceleration(acceleration, w), cfg)};
        } catch (const std::exception &ex) {
            throw SweepPointError(w, ex.what(), std::current_exception());
        }
    };

    std::vector<SweepSimPoint> out;
    out.reserve(omegas.size());
    const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < omegas.size(); start += batch) {
        std::vector<std::future<SweepSimPoint>> jobs;
        const std::size_t stop = std::min(omegas.size(), start + batch);
        for (std::size_t i = start; i < stop; ++i)
            jobs.push_back(std::async(std::launch::async, run_point, omegas[i]));
        for (auto &job : jobs)
            out.push_back(job.get());
    }
    return out;
}

} // namespace harvest::sim
