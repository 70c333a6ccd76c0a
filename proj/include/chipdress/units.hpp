#pragma once

// Conversion factors from the external (lab) units to SI. Frequencies given
// in Hz/kHz/MHz are cyclic; multiply by two_pi for angular frequencies.

#include <numbers>

namespace chipdress::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double um = 1e-6;
inline constexpr double nm = 1e-9;
inline constexpr double gauss = 1e-4;
inline constexpr double mG = 1e-7;
inline constexpr double mA = 1e-3;
inline constexpr double mW = 1e-3;
inline constexpr double uW = 1e-6;
inline constexpr double Hz = 1.0;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;

/// Cyclic frequency in kHz to angular frequency in rad/s.
constexpr double angular_from_kHz(double f_kHz) { return two_pi * f_kHz * kHz; }
constexpr double kHz_from_angular(double omega) { return omega / (two_pi * kHz); }

}  // namespace chipdress::units
