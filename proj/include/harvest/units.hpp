// Unit helpers and the peak/RMS amplitude convention tag.
#pragma once

#include "harvest/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace harvest {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz_to_rad_per_s(double f_hz) noexcept { return kTwoPi * f_hz; }
constexpr double rad_per_s_to_hz(double omega) noexcept { return omega / kTwoPi; }

// =============================================================================
// Amplitude convention
// =============================================================================

/// Whether a sinusoidal magnitude is quoted as its peak or its RMS value.
/// Closed-form model equations always consume peak amplitudes; RMS figures
/// are converted where they enter.
enum class AmplitudeConvention { peak, rms };

inline std::string_view to_string(AmplitudeConvention c) noexcept {
    return c == AmplitudeConvention::peak ? "peak" : "rms";
}

inline AmplitudeConvention parse_convention(std::string_view text) {
    if (text == "peak")
        return AmplitudeConvention::peak;
    if (text == "rms")
        return AmplitudeConvention::rms;
    throw InvalidParameter("amplitude convention must be 'peak' or 'rms', got '" +
                           std::string(text) + "'");
}

/// A sinusoid magnitude together with the convention it is quoted in.
struct TaggedAmplitude {
    double value = 0.0;
    AmplitudeConvention convention = AmplitudeConvention::peak;

    double peak() const noexcept {
        return convention == AmplitudeConvention::peak ? value : value * std::numbers::sqrt2;
    }
    double rms() const noexcept {
        return convention == AmplitudeConvention::rms ? value : value / std::numbers::sqrt2;
    }
    double in(AmplitudeConvention c) const noexcept {
        return c == AmplitudeConvention::peak ? peak() : rms();
    }
};

} // namespace harvest
