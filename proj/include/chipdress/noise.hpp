#pragma once

#include <array>

#include "chipdress/config.hpp"

namespace chipdress {

/// Perturbations applied on top of a resolved configuration. The microwave
/// drive frequency and the LO detuning stay at their nominal values.
struct PhaseOverrides {
  double dB = 0.0;  // T, uniform field change along B(r_min)
  double dP = 0.0;  // W, microwave power change
};

/// Configuration with `o` applied: bias += dB * B_hat(r_min), detuning moved
/// so that the drive frequency is unchanged, power += dP. Throws ConfigError
/// for a negative resulting power.
ExperimentConfig perturbed_config(const ExperimentConfig& resolved, const PhaseOverrides& o);

/// Ramsey phase accumulated between t0 and t1 after the microwave switch-on:
///   phi = int [V_1(x_1(t)) - V_0(x_0(t))] / hbar dt + d_LO (t1 - t0)
/// along the classical trajectories of both states (trapezoidal rule on the
/// trajectory time step).
double accumulated_phase(const ExperimentConfig& cfg, double t0, double t1, const PhaseOverrides& o = {});
inline double accumulated_phase(const ExperimentConfig& cfg, double T_R, const PhaseOverrides& o = {}) {
  return accumulated_phase(cfg, 0.0, T_R, o);
}

enum class NoiseSource { field, power };

struct Sensitivity {
  double derivative = 0.0;               // rad/T or rad/W
  std::array<double, 3> steps{};         // T or W
  std::array<double, 3> estimates{};     // central differences per step
  double spread = 0.0;                   // max relative deviation from the middle step
};

/// Central finite-difference dphi/dB or dphi/dP at T_R. Steps {0.3, 1, 3} mG
/// or {0.3, 1, 3} mW; throws NumericalError when the estimates disagree by
/// more than 2%.
Sensitivity sensitivity(const ExperimentConfig& cfg, double T_R, NoiseSource which, unsigned workers = 1);

struct NoiseBudget {
  double T_R = 0.0;        // s
  double dphi_dB = 0.0;    // rad/T
  double dphi_dP = 0.0;    // rad/W
  double dphi_dN = 0.0;    // rad/atom
  double dB = 0.0, dP = 0.0, N = 0.0, dN = 0.0;
  double phi_B = 0.0;      // rad rms
  double phi_P = 0.0;
  double phi_S = 0.0;
  double phi_N = 0.0;
  double total = 0.0;      // quadrature sum
  double observed = 0.0;   // rad
  double fraction = 0.0;   // total / observed
};

/// Observed phase noise used when the config leaves it at zero: 0.037 pi / 0.30.
double default_observed_noise();

/// Budget from given sensitivities and fluctuations (all >= 0 after abs).
NoiseBudget combine_budget(double dphi_dB, double dphi_dP, const NoiseConfig& n, double N);

/// Full budget at T_R (defaults to cfg.noise.TR when <= 0).
NoiseBudget budget(const ExperimentConfig& cfg, double T_R = 0.0, unsigned workers = 1);

}  // namespace chipdress
