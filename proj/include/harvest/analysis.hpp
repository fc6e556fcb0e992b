// Measurement-side analysis: Q from swept resonance curves, damping
// decomposition, load-sweep optimum, proof-mass displacement estimates and
// acceleration-normalised power-density comparison of devices.
#pragma once

#include "harvest/errors.hpp"
#include "harvest/model.hpp"
#include "harvest/units.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace harvest::analysis {

// =============================================================================
// Types
// =============================================================================

enum class SweepQuantity { volts, meters };

struct SweepPoint {
    double frequency_Hz;
    double magnitude;
};

/// Magnitude response measured or generated over increasing frequency.
struct SweepCurve {
    std::vector<SweepPoint> points;
    SweepQuantity quantity = SweepQuantity::volts;
    TaggedAmplitude excitation_acceleration{};
};

struct QEstimate {
    double q = 0.0;
    double f_res_Hz = 0.0;
    double bandwidth_Hz = 0.0;
    double peak_magnitude = 0.0;
};

struct LoadPoint {
    double r_load_ohm;
    double p_load_W;
    double p_total_W;
};

struct LoadSweep {
    std::vector<LoadPoint> points;
};

struct OptimalLoad {
    double r_opt_ohm = 0.0;
    double p_max_W = 0.0;
    bool bracketed = true; ///< false when the maximum sits on a sweep boundary
};

struct DeviceRecord {
    std::string name;
    double volume_mm3 = 0.0;
    double active_mass_kg = 0.0;
    double resonant_frequency_Hz = 0.0;
    double measured_power_W = 0.0;
    TaggedAmplitude measured_at_acceleration{};
    std::optional<double> flux_density_T;
    std::optional<double> r_coil_ohm;
    std::string notes;
};

struct CatalogRow {
    std::string name;
    double measured_power_W;
    TaggedAmplitude measured_at_acceleration;
    double normalized_power_W;
    double density_nW_per_mm3;
};

inline void validate(const SweepCurve &s) {
    detail::require(s.points.size() >= 5, "sweep curve needs at least 5 points");
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        detail::require(std::isfinite(s.points[i].magnitude) && s.points[i].magnitude >= 0.0,
                        "sweep magnitudes must be finite and >= 0");
        if (i > 0)
            detail::require(s.points[i].frequency_Hz > s.points[i - 1].frequency_Hz,
                            "sweep frequencies must be strictly increasing");
    }
}

inline void validate(const LoadSweep &ls) {
    detail::require(ls.points.size() >= 3, "load sweep needs at least 3 points");
    for (std::size_t i = 0; i < ls.points.size(); ++i) {
        const auto &p = ls.points[i];
        detail::require(p.r_load_ohm > 0.0, "load resistances must be > 0");
        detail::require(p.p_load_W >= 0.0 && p.p_load_W <= p.p_total_W * (1.0 + 1e-12),
                        "load power must lie in [0, total power]");
        if (i > 0)
            detail::require(p.r_load_ohm > ls.points[i - 1].r_load_ohm,
                            "load resistances must be strictly increasing");
    }
}

inline void validate(const DeviceRecord &d) {
    detail::require(d.volume_mm3 > 0.0, d.name + ": volume_mm3 must be > 0");
    detail::require(d.active_mass_kg > 0.0, d.name + ": active_mass_kg must be > 0");
    detail::require(d.resonant_frequency_Hz > 0.0, d.name + ": resonant_frequency_hz must be > 0");
    detail::require(d.measured_at_acceleration.value > 0.0,
                    d.name + ": measured acceleration must be > 0");
    detail::require(d.measured_power_W >= 0.0, d.name + ": measured_power_w must be >= 0");
}

namespace detail {

struct Vertex {
    double x;
    double y;
};

// Extremum of the parabola through three points with distinct abscissae.
inline Vertex parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    const double a = (d1 - d0) / (x2 - x0);
    if (a == 0.0)
        return {x1, y1};
    const double b = d0 - a * (x0 + x1);
    const double x = -b / (2.0 * a);
    const double y = y1 + (x - x1) * (d0 + a * (x - x0));
    return {x, y};
}

inline double cross(const SweepPoint &lo, const SweepPoint &hi, double level) {
    if (hi.magnitude == lo.magnitude)
        return lo.frequency_Hz;
    return lo.frequency_Hz + (level - lo.magnitude) / (hi.magnitude - lo.magnitude) *
                                 (hi.frequency_Hz - lo.frequency_Hz);
}

} // namespace detail

// =============================================================================
// Q extraction and damping decomposition
// =============================================================================

/// Half-power bandwidth estimate Q = f_res / Δf.
///
/// f_res is the vertex of the parabola through the maximum sample and its
/// neighbours. When the maximum is a plateau of equal samples, the midpoint
/// of the widest plateau is used instead. Δf spans the two crossings of
/// peak/√2, each found by linear interpolation between bracketing samples.
inline QEstimate extract_q_half_power(const SweepCurve &s) {
    validate(s);
    const auto &pts = s.points;
    const std::size_t n = pts.size();

    double max_mag = 0.0;
    for (const auto &p : pts)
        max_mag = std::max(max_mag, p.magnitude);
    harvest::detail::require_precondition(
        max_mag > pts.front().magnitude && max_mag > pts.back().magnitude,
        "sweep has no interior peak above both endpoints");

    // Widest run of samples equal to the maximum (first one on ties).
    std::size_t best_first = 0, best_len = 0;
    for (std::size_t i = 0; i < n;) {
        if (pts[i].magnitude != max_mag) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && pts[j + 1].magnitude == max_mag)
            ++j;
        if (j - i + 1 > best_len) {
            best_first = i;
            best_len = j - i + 1;
        }
        i = j + 1;
    }
    const std::size_t best_last = best_first + best_len - 1;

    QEstimate out;
    if (best_len == 1) {
        const std::size_t i = best_first;
        const auto v = detail::parabola_vertex(pts[i - 1].frequency_Hz, pts[i - 1].magnitude,
                                               pts[i].frequency_Hz, pts[i].magnitude,
                                               pts[i + 1].frequency_Hz, pts[i + 1].magnitude);
        out.f_res_Hz = v.x;
        out.peak_magnitude = v.y;
    } else {
        out.f_res_Hz = 0.5 * (pts[best_first].frequency_Hz + pts[best_last].frequency_Hz);
        out.peak_magnitude = max_mag;
    }

    const double level = out.peak_magnitude / std::numbers::sqrt2;
    std::optional<double> f_lo, f_hi;
    for (std::size_t j = best_first; j-- > 0;) {
        if (pts[j].magnitude <= level) {
            f_lo = detail::cross(pts[j], pts[j + 1], level);
            break;
        }
    }
    for (std::size_t j = best_last + 1; j < n; ++j) {
        if (pts[j].magnitude <= level) {
            f_hi = detail::cross(pts[j - 1], pts[j], level);
            break;
        }
    }
    if (!f_lo || !f_hi)
        throw BandwidthNotBracketed("half-power bandwidth not bracketed by the sweep range");

    out.bandwidth_Hz = *f_hi - *f_lo;
    harvest::detail::require_precondition(out.bandwidth_Hz > 0.0, "zero half-power bandwidth");
    out.q = out.f_res_Hz / out.bandwidth_Hz;
    return out;
}

/// Splits loaded and open-circuit Q into parasitic and electrical parts.
inline DampingDecomposition decompose_damping(double q_loaded, double q_open) {
    harvest::detail::require(q_loaded > 0.0, "loaded Q must be > 0");
    harvest::detail::require_precondition(
        q_open > q_loaded, "open-circuit Q must exceed loaded Q (electrical damping > 0)");
    return compose_q_factors({.q_total = q_loaded, .q_open_circuit = q_open, .q_electrical = std::nullopt});
}

/// z = Q·Y, the resonant proof-mass amplitude for base amplitude Y.
inline double estimate_mass_displacement(double q_loaded, double y_base_m) {
    harvest::detail::require(q_loaded > 0.0, "Q must be > 0");
    harvest::detail::require(y_base_m >= 0.0, "base amplitude must be >= 0");
    return q_loaded * y_base_m;
}

// =============================================================================
// Load sweeps
// =============================================================================

/// Maximum load power over a resistance sweep, refined by a parabola in
/// ln(R). Equal maxima resolve to the lowest resistance. A maximum on either
/// end of the sweep is returned unrefined with `bracketed = false`.
inline OptimalLoad find_optimal_load(const LoadSweep &ls) {
    validate(ls);
    const auto &pts = ls.points;
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].p_load_W > pts[best].p_load_W)
            best = i;

    if (best == 0 || best + 1 == pts.size())
        return {pts[best].r_load_ohm, pts[best].p_load_W, false};

    const auto v = detail::parabola_vertex(
        std::log(pts[best - 1].r_load_ohm), pts[best - 1].p_load_W, std::log(pts[best].r_load_ohm),
        pts[best].p_load_W, std::log(pts[best + 1].r_load_ohm), pts[best + 1].p_load_W);
    return {std::exp(v.x), v.y, true};
}

// =============================================================================
// Power normalisation and device comparison
// =============================================================================

/// Rescales a measured power to another acceleration at fixed frequency.
/// With Y = A/ωn², resonant power goes as A², so P·(A_target/A_measured)².
inline double normalize_power(double p_W, double a_measured, double a_target) {
    harvest::detail::require(a_measured > 0.0 && a_target > 0.0, "accelerations must be > 0");
    const double ratio = a_target / a_measured;
    return p_W * ratio * ratio;
}

inline double normalize_power(double p_W, TaggedAmplitude a_measured, TaggedAmplitude a_target) {
    return normalize_power(p_W, a_measured.peak(), a_target.peak());
}

/// Acceleration-normalised power per unit active volume [nW/mm³].
inline double power_density(const DeviceRecord &d, TaggedAmplitude a_target) {
    validate(d);
    return normalize_power(d.measured_power_W, d.measured_at_acceleration, a_target) * 1e9 /
           d.volume_mm3;
}

/// Rows ordered by descending power density, ties by name.
inline std::vector<CatalogRow> compare_catalog(const std::vector<DeviceRecord> &records,
                                               TaggedAmplitude a_target) {
    harvest::detail::require(!records.empty(), "catalog has no devices");
    std::vector<CatalogRow> rows;
    rows.reserve(records.size());
    for (const auto &d : records)
        rows.push_back({d.name, d.measured_power_W, d.measured_at_acceleration,
                        normalize_power(d.measured_power_W, d.measured_at_acceleration, a_target),
                        power_density(d, a_target)});
    std::sort(rows.begin(), rows.end(), [](const CatalogRow &a, const CatalogRow &b) {
        if (a.density_nW_per_mm3 != b.density_nW_per_mm3)
            return a.density_nW_per_mm3 > b.density_nW_per_mm3;
        return a.name < b.name;
    });
    return rows;
}

} // namespace harvest::analysis
