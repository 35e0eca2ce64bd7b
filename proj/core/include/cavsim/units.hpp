#pragma once

namespace cavsim {

/// Speed of light in vacuum (m/s).
inline constexpr double speed_of_light = 299'792'458.0;

/// Reduced Planck constant (J s).
inline constexpr double hbar = 1.054571817e-34;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Plain frequency in Hz -> angular frequency in rad/s. All library-internal
/// frequencies and rates are angular; conversion happens once, at the boundary.
inline constexpr double angular(double hz) { return two_pi * hz; }

/// Angular frequency in rad/s -> plain frequency in Hz.
inline constexpr double in_hz(double rad_per_s) { return rad_per_s / two_pi; }

} // namespace cavsim
