// Closed-form steady-state model of a resonant inertial electromagnetic
// generator: a base-excited mass-spring-damper whose damping splits into a
// parasitic part and an electrical part extracted by a coil.
#pragma once

#include "harvest/errors.hpp"
#include "harvest/units.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace harvest {

// =============================================================================
// Domain types
// =============================================================================

/// Lumped mechanical model of the generator.
struct GeneratorParams {
    double mass_kg = 0.0;
    double stiffness_N_per_m = 0.0;
    double zeta_parasitic = 0.0;
    std::optional<double> displacement_limit_m; ///< absent means unlimited
};

inline void validate(const GeneratorParams &g) {
    detail::require(std::isfinite(g.mass_kg) && g.mass_kg > 0.0, "mass_kg must be > 0");
    detail::require(std::isfinite(g.stiffness_N_per_m) && g.stiffness_N_per_m > 0.0,
                    "stiffness_N_per_m must be > 0");
    detail::require(g.zeta_parasitic >= 0.0 && g.zeta_parasitic < 1.0,
                    "zeta_parasitic must lie in [0, 1)");
    if (g.displacement_limit_m)
        detail::require(*g.displacement_limit_m > 0.0, "displacement_limit_m must be > 0");
}

/// Builds the lumped model from a mass and a resonant frequency (k = m ωn²).
inline GeneratorParams make_generator(double mass_kg, double omega_n, double zeta_parasitic,
                                      std::optional<double> displacement_limit_m = {}) {
    GeneratorParams g{mass_kg, mass_kg * omega_n * omega_n, zeta_parasitic,
                      displacement_limit_m};
    validate(g);
    return g;
}

/// Electromagnetic transduction parameters. A load of +infinity models an
/// open circuit: no current flows, so there is no electrical damping.
struct CoilCircuit {
    unsigned turns = 0;
    double side_length_m = 0.0;
    double flux_density_T = 0.0;
    double r_coil_ohm = 0.0;
    double l_coil_H = 0.0;
    double r_load_ohm = std::numeric_limits<double>::infinity();

    /// N·l·B, the EMF produced per unit relative velocity [V·s/m].
    double coupling() const noexcept {
        return static_cast<double>(turns) * side_length_m * flux_density_T;
    }
    bool open_circuit() const noexcept { return std::isinf(r_load_ohm); }
};

inline void validate(const CoilCircuit &c) {
    detail::require(std::isfinite(c.side_length_m) && c.side_length_m >= 0.0,
                    "side_length_m must be >= 0");
    detail::require(std::isfinite(c.flux_density_T) && c.flux_density_T >= 0.0,
                    "flux_density_T must be >= 0");
    detail::require(std::isfinite(c.r_coil_ohm) && c.r_coil_ohm >= 0.0,
                    "r_coil_ohm must be >= 0");
    detail::require(std::isfinite(c.l_coil_H) && c.l_coil_H >= 0.0, "l_coil_H must be >= 0");
    detail::require(c.r_load_ohm > 0.0, "r_load_ohm must be > 0");
}

/// Sinusoidal base vibration y(t) = Y sin(ωt), Y being the peak amplitude.
/// The acceleration amplitude is always derived as ω²Y.
class Excitation {
public:
    Excitation(double amplitude_m, double omega_rad_per_s)
        : amplitude_m_(amplitude_m), omega_(omega_rad_per_s) {
        detail::require(std::isfinite(amplitude_m) && amplitude_m >= 0.0,
                        "excitation amplitude must be >= 0");
        detail::require(std::isfinite(omega_rad_per_s) && omega_rad_per_s > 0.0,
                        "excitation frequency must be > 0");
    }

    /// From an acceleration magnitude in either convention.
    static Excitation from_acceleration(TaggedAmplitude accel, double omega_rad_per_s) {
        detail::require(std::isfinite(omega_rad_per_s) && omega_rad_per_s > 0.0,
                        "excitation frequency must be > 0");
        return {accel.peak() / (omega_rad_per_s * omega_rad_per_s), omega_rad_per_s};
    }

    double amplitude_m() const noexcept { return amplitude_m_; }
    double omega_rad_per_s() const noexcept { return omega_; }
    double acceleration_m_s2() const noexcept { return omega_ * omega_ * amplitude_m_; }

private:
    double amplitude_m_;
    double omega_;
};

/// Evaluated steady-state outputs at one frequency and load.
struct ResponsePoint {
    double z_amplitude_m = 0.0;
    double phase_rad = 0.0;
    double zeta_electrical = 0.0;
    double zeta_total = 0.0;
    double p_dissipated_W = 0.0;
    double p_load_W = 0.0;
    double p_total_electrical_W = 0.0; ///< load + coil dissipation
    double emf_rms_V = 0.0;
    double v_load_rms_V = 0.0;
};

/// Loaded, open-circuit and electrical-only quality factors with matching
/// damping ratios (ζ = 1/(2Q) for each).
struct DampingDecomposition {
    double q_total = 0.0;
    double q_open_circuit = 0.0;
    double q_electrical = 0.0;
    double zeta_p = 0.0;
    double zeta_e = 0.0;
    double zeta_t = 0.0;
};

/// Two of the three quality factors; the missing one is solved for.
struct QFactorSet {
    std::optional<double> q_total;
    std::optional<double> q_open_circuit;
    std::optional<double> q_electrical;
};

struct DisplacementResponse {
    double amplitude_m = 0.0;
    double phase_rad = 0.0;
};

struct LimitCheck {
    bool pass = true;
    std::optional<double> margin_m; ///< limit − predicted; absent when unlimited
};

// =============================================================================
// Basic relations
// =============================================================================

inline double natural_frequency(const GeneratorParams &g) {
    validate(g);
    return std::sqrt(g.stiffness_N_per_m / g.mass_kg);
}

inline double damping_ratio_from_coefficient(double c_damp, const GeneratorParams &g) {
    detail::require(c_damp >= 0.0, "damping coefficient must be >= 0");
    return c_damp / (2.0 * g.mass_kg * natural_frequency(g));
}

inline double damping_coefficient_from_ratio(double zeta, const GeneratorParams &g) {
    detail::require(zeta >= 0.0, "damping ratio must be >= 0");
    return 2.0 * g.mass_kg * natural_frequency(g) * zeta;
}

namespace detail {

inline void require_damping_ratio(double zeta) {
    require_precondition(std::isfinite(zeta) && zeta > 0.0 && zeta < 1.0,
                         "total damping ratio must lie in (0, 1)");
}

inline void require_at_resonance(const GeneratorParams &g, const Excitation &e) {
    const double wn = natural_frequency(g);
    require_precondition(std::abs(e.omega_rad_per_s() - wn) <= 1e-6 * wn,
                         "excitation must be at the natural frequency");
}

} // namespace detail

// =============================================================================
// Steady-state response
// =============================================================================

/// Relative displacement amplitude and phase lag of z(t) = Z sin(ωt − φ).
/// The phase is taken on the [0, π] branch: 0 well below resonance, π/2 at
/// resonance, approaching π far above it.
inline DisplacementResponse displacement_response(const GeneratorParams &g, double zeta_total,
                                                  const Excitation &e) {
    detail::require_precondition(std::isfinite(zeta_total) && zeta_total >= 0.0 &&
                                     zeta_total < 1.0,
                                 "total damping ratio must lie in [0, 1)");
    const double wn = natural_frequency(g);
    const double w = e.omega_rad_per_s();
    const double c_total = 2.0 * g.mass_kg * wn * zeta_total;

    const double stiff = g.stiffness_N_per_m / g.mass_kg - w * w;
    const double damp = c_total * w / g.mass_kg;
    const double denom = std::hypot(stiff, damp);
    detail::require_precondition(denom > 0.0,
                                 "undamped excitation at resonance has unbounded amplitude");

    return {w * w * e.amplitude_m() / denom,
            std::atan2(c_total * w, g.stiffness_N_per_m - w * w * g.mass_kg)};
}

/// Mean power dissipated in the total damper at an arbitrary drive frequency.
inline double dissipated_power(const GeneratorParams &g, double zeta_total,
                               const Excitation &e) {
    detail::require_damping_ratio(zeta_total);
    const double wn = natural_frequency(g);
    const double w = e.omega_rad_per_s();
    const double r = w / wn;
    const double y = e.amplitude_m();
    const double num = g.mass_kg * zeta_total * y * y * r * r * r * w * w * w;
    const double den = (1.0 - r * r) * (1.0 - r * r) + (2.0 * zeta_total * r) * (2.0 * zeta_total * r);
    return num / den;
}

/// Dissipated power when driven exactly at ωn: m Y² ωn³ / (4 ζ_T).
inline double max_resonant_power(const GeneratorParams &g, double zeta_total,
                                 const Excitation &e) {
    detail::require_damping_ratio(zeta_total);
    detail::require_at_resonance(g, e);
    const double wn = natural_frequency(g);
    const double y = e.amplitude_m();
    return g.mass_kg * y * y * wn * wn * wn / (4.0 * zeta_total);
}

/// Electrical power at resonance, all of it attributed to the load.
/// Maximised over ζ_e at ζ_e = ζ_p.
inline double load_power(const GeneratorParams &g, double zeta_p, double zeta_e,
                         const Excitation &e) {
    detail::require(zeta_p >= 0.0 && zeta_e >= 0.0, "damping ratios must be >= 0");
    detail::require_precondition(zeta_p + zeta_e > 0.0, "zeta_p + zeta_e must be > 0");
    detail::require_at_resonance(g, e);
    const double wn = natural_frequency(g);
    const double y = e.amplitude_m();
    const double zt = zeta_p + zeta_e;
    return g.mass_kg * zeta_e * y * y * wn * wn * wn / (4.0 * zt * zt);
}

/// load_power with the coil's own I²R share removed: only R_L/(R_L+R_coil)
/// of the electrical power reaches the load.
inline double delivered_load_power(const GeneratorParams &g, double zeta_p, double zeta_e,
                                   const Excitation &e, double r_coil_ohm, double r_load_ohm) {
    detail::require(r_coil_ohm >= 0.0, "r_coil_ohm must be >= 0");
    detail::require(r_load_ohm > 0.0, "r_load_ohm must be > 0");
    return load_power(g, zeta_p, zeta_e, e) * r_load_ohm / (r_load_ohm + r_coil_ohm);
}

// =============================================================================
// Electromagnetic coupling and load matching
// =============================================================================

/// (N·l·B)² / |R_L + R_coil + jωL_coil|.
inline double em_damping_coefficient(const CoilCircuit &c, double omega_rad_per_s) {
    validate(c);
    detail::require(omega_rad_per_s >= 0.0, "frequency must be >= 0");
    if (c.open_circuit())
        return 0.0;
    const double z = std::hypot(c.r_load_ohm + c.r_coil_ohm, omega_rad_per_s * c.l_coil_H);
    detail::require_precondition(z > 0.0, "coil circuit has zero impedance");
    const double phi = c.coupling();
    return phi * phi / z;
}

/// Load resistance maximising delivered power: R_coil + (N·l·B)²/c_p.
inline double optimal_load(const CoilCircuit &c, double c_parasitic) {
    detail::require_precondition(std::isfinite(c_parasitic) && c_parasitic > 0.0,
                                 "parasitic damping coefficient must be > 0");
    const double phi = c.coupling();
    return c.r_coil_ohm + phi * phi / c_parasitic;
}

/// Maximum average load power with a resistive coil:
/// (m ωn³ Y² / (16 ζ_p)) (1 − R_coil/R_load).
inline double max_avg_load_power(const GeneratorParams &g, double zeta_p, const Excitation &e,
                                 double r_coil_ohm, double r_load_ohm) {
    detail::require(r_load_ohm > 0.0, "r_load_ohm must be > 0");
    detail::require_precondition(zeta_p > 0.0, "zeta_p must be > 0");
    detail::require_at_resonance(g, e);
    const double wn = natural_frequency(g);
    const double y = e.amplitude_m();
    return g.mass_kg * wn * wn * wn * y * y / (16.0 * zeta_p) * (1.0 - r_coil_ohm / r_load_ohm);
}

// =============================================================================
// Quality factors
// =============================================================================

/// Solves 1/Q_T = 1/Q_OC + 1/Q_E for whichever factor is missing.
inline DampingDecomposition compose_q_factors(const QFactorSet &q) {
    const int given = int(q.q_total.has_value()) + int(q.q_open_circuit.has_value()) +
                      int(q.q_electrical.has_value());
    detail::require_precondition(given == 2, "exactly two quality factors must be provided");
    for (const auto &v : {q.q_total, q.q_open_circuit, q.q_electrical})
        if (v)
            detail::require(std::isfinite(*v) && *v > 0.0,
                            "quality factors must be finite and > 0");

    DampingDecomposition d;
    if (!q.q_electrical) {
        detail::require_precondition(*q.q_total < *q.q_open_circuit,
                                     "loaded Q must be below open-circuit Q");
        d.q_total = *q.q_total;
        d.q_open_circuit = *q.q_open_circuit;
        d.q_electrical = 1.0 / (1.0 / d.q_total - 1.0 / d.q_open_circuit);
    } else if (!q.q_open_circuit) {
        detail::require_precondition(*q.q_total < *q.q_electrical,
                                     "loaded Q must be below electrical Q");
        d.q_total = *q.q_total;
        d.q_electrical = *q.q_electrical;
        d.q_open_circuit = 1.0 / (1.0 / d.q_total - 1.0 / d.q_electrical);
    } else {
        d.q_open_circuit = *q.q_open_circuit;
        d.q_electrical = *q.q_electrical;
        d.q_total = 1.0 / (1.0 / d.q_open_circuit + 1.0 / d.q_electrical);
    }
    d.zeta_p = 1.0 / (2.0 * d.q_open_circuit);
    d.zeta_e = 1.0 / (2.0 * d.q_electrical);
    d.zeta_t = 1.0 / (2.0 * d.q_total);
    return d;
}

// =============================================================================
// Boundary conversions and checks
// =============================================================================

/// Y = A/ω². The result carries the same convention as the acceleration.
inline TaggedAmplitude base_amplitude_from_acceleration(TaggedAmplitude accel,
                                                        double omega_rad_per_s) {
    detail::require(std::isfinite(omega_rad_per_s) && omega_rad_per_s > 0.0,
                    "frequency must be > 0");
    detail::require(accel.value >= 0.0, "acceleration must be >= 0");
    return {accel.value / (omega_rad_per_s * omega_rad_per_s), accel.convention};
}

inline double load_voltage_from_power(double p_load_W, double r_load_ohm) {
    detail::require(r_load_ohm > 0.0, "r_load_ohm must be > 0");
    detail::require(p_load_W >= 0.0, "power must be >= 0");
    return std::sqrt(p_load_W * r_load_ohm);
}

inline LimitCheck check_displacement_limit(const GeneratorParams &g, double predicted_z_m) {
    if (!g.displacement_limit_m)
        return {true, std::nullopt};
    const double margin = *g.displacement_limit_m - predicted_z_m;
    return {predicted_z_m <= *g.displacement_limit_m, margin};
}

// =============================================================================
// Combined evaluation
// =============================================================================

/// Full steady-state operating point for a generator driving a coil circuit.
/// Electrical damping comes from the coil; the dissipated power is split
/// between parasitic loss, coil resistance and load in proportion to the
/// damping ratios and resistances.
inline ResponsePoint evaluate_response(const GeneratorParams &g, const CoilCircuit &c,
                                       const Excitation &e) {
    validate(g);
    const double w = e.omega_rad_per_s();
    const double zeta_e = damping_ratio_from_coefficient(em_damping_coefficient(c, w), g);
    const double zeta_t = g.zeta_parasitic + zeta_e;
    detail::require_damping_ratio(zeta_t);

    ResponsePoint r;
    const auto disp = displacement_response(g, zeta_t, e);
    r.z_amplitude_m = disp.amplitude_m;
    r.phase_rad = disp.phase_rad;
    r.zeta_electrical = zeta_e;
    r.zeta_total = zeta_t;
    r.p_dissipated_W = dissipated_power(g, zeta_t, e);
    r.p_total_electrical_W = r.p_dissipated_W * zeta_e / zeta_t;
    r.emf_rms_V = c.coupling() * w * r.z_amplitude_m / std::numbers::sqrt2;
    if (c.open_circuit()) {
        r.v_load_rms_V = r.emf_rms_V;
    } else {
        r.p_load_W = r.p_total_electrical_W * c.r_load_ohm / (c.r_load_ohm + c.r_coil_ohm);
        r.v_load_rms_V = load_voltage_from_power(r.p_load_W, c.r_load_ohm);
    }
    return r;
}

} // namespace harvest
