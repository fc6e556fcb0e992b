// First-mode frequency of a cantilever carrying a tip mass, from
// Euler-Bernoulli bending stiffness and an effective modal mass.
#pragma once

#include "harvest/errors.hpp"
#include "harvest/units.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace harvest::beam {

struct MaterialProps {
    std::string name;
    double youngs_modulus_Pa = 0.0;
    double density_kg_m3 = 0.0;
};

/// Rectangular cantilever bending about its thin axis, with a point tip mass.
struct BeamSpec {
    double length_m = 0.0;
    double width_m = 0.0;
    double thickness_m = 0.0;
    MaterialProps material;
    double tip_mass_kg = 0.0;
};

/// Share of the distributed beam mass that moves with the first mode.
inline constexpr double kEffectiveMassFraction = 33.0 / 140.0;

inline void validate(const MaterialProps &m) {
    detail::require(m.youngs_modulus_Pa > 0.0, m.name + ": youngs_modulus_pa must be > 0");
    detail::require(m.density_kg_m3 > 0.0, m.name + ": density_kg_m3 must be > 0");
}

inline void validate(const BeamSpec &b) {
    validate(b.material);
    detail::require(b.length_m > 0.0 && b.width_m > 0.0 && b.thickness_m > 0.0,
                    "beam dimensions must be > 0");
    detail::require(b.thickness_m <= b.width_m, "beam thickness must not exceed width");
    detail::require(b.tip_mass_kg >= 0.0, "tip mass must be >= 0");
}

/// k = 3EI/L³ with I = w t³ / 12.
inline double bending_stiffness(const BeamSpec &b) {
    validate(b);
    const double inertia = b.width_m * b.thickness_m * b.thickness_m * b.thickness_m / 12.0;
    return 3.0 * b.material.youngs_modulus_Pa * inertia / (b.length_m * b.length_m * b.length_m);
}

inline double beam_mass(const BeamSpec &b) {
    return b.material.density_kg_m3 * b.length_m * b.width_m * b.thickness_m;
}

inline double effective_mass(const BeamSpec &b) {
    return b.tip_mass_kg + kEffectiveMassFraction * beam_mass(b);
}

/// Resonant frequency in Hz.
inline double resonant_frequency(const BeamSpec &b) {
    return rad_per_s_to_hz(std::sqrt(bending_stiffness(b) / effective_mass(b)));
}

/// Frequency grid, one row per thickness and one column per material.
inline std::vector<std::vector<double>> frequency_table(const BeamSpec &base,
                                                        std::span<const double> thicknesses,
                                                        std::span<const MaterialProps> materials) {
    detail::require(!thicknesses.empty(), "thickness list is empty");
    detail::require(!materials.empty(), "material list is empty");
    for (std::size_t i = 1; i < thicknesses.size(); ++i)
        detail::require(thicknesses[i] > thicknesses[i - 1],
                        "thicknesses must be strictly increasing");

    std::vector<std::vector<double>> grid;
    grid.reserve(thicknesses.size());
    for (const double t : thicknesses) {
        std::vector<double> row;
        row.reserve(materials.size());
        for (const auto &mat : materials) {
            BeamSpec b = base;
            b.thickness_m = t;
            b.material = mat;
            row.push_back(resonant_frequency(b));
        }
        grid.push_back(std::move(row));
    }
    return grid;
}

} // namespace harvest::beam
