#pragma once

#include <numbers>

// Physical constants (CODATA 2018, exact where the SI defines them) and the
// angular-frequency conventions used across the library.
//
// Internally every frequency-like quantity is an angular rate in rad/s; all
// user-facing I/O converts to ordinary frequency in Hz exactly once at the
// boundary. Keeping a single convention internally removes the 2*pi bug class
// entirely.

namespace cavem::constants {

inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J/K (exact)
inline constexpr double epsilon_0 = 8.8541878128e-12; // F/m

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency (Hz) -> angular frequency (rad/s).
[[nodiscard]] inline constexpr double rad_from_hz(double f_hz) { return two_pi * f_hz; }

/// Angular frequency (rad/s) -> ordinary frequency (Hz).
[[nodiscard]] inline constexpr double hz_from_rad(double omega) { return omega / two_pi; }

} // namespace cavem::constants
