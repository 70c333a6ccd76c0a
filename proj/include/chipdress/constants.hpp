#pragma once

#include <numbers>

namespace chipdress {

/// Physical constants in SI units.
///
/// mu_B, hbar, mu0, eps0 are CODATA 2018. alpha0, C4 and the scattering
/// lengths are literature defaults for 87Rb and may be overridden from the
/// config file.
struct PhysicalConstants {
  double mu_B = 9.2740100783e-24;         // J/T
  double hbar = 1.054571817e-34;          // J s
  double mass = 1.443160648e-25;          // kg, 87Rb
  double g_J = 2.002331;
  double g_I = -0.000995;
  double omega_hfs = 2.0 * std::numbers::pi * 6.834682611e9;  // rad/s
  double g_grav = 9.80665;                // m/s^2
  double alpha0 = 5.26e-39;               // C m^2/V, h x 0.0794 Hz/(V/cm)^2
  double C4 = 8.2e-56;                    // J m^4
  double a00 = 100.4 * 5.29177210903e-11; // m, |1,-1>-|1,-1>
  double a11 = 100.4 * 5.29177210903e-11; // m, |2,1>-|2,1>
  double a01 = 100.4 * 5.29177210903e-11; // m, inter-state
  double mu0 = 1.25663706212e-6;          // T m/A
  double eps0 = 8.8541878128e-12;         // F/m

  double planck() const { return 2.0 * std::numbers::pi * hbar; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace chipdress
