#pragma once

#include <string>
#include <vector>

#include "chipdress/config.hpp"
#include "chipdress/grid.hpp"
#include "chipdress/hyperfine.hpp"
#include "chipdress/magnetostatics.hpp"

namespace chipdress {

enum class PotentialMode { exact, perturbative };

/// Contributions to the state potentials at one point (J).
struct PotentialBreakdown {
  double V_Z = 0.0;        // mu_B |B| / 2
  double common = 0.0;     // gravity + V_e + Casimir-Polder
  double V0 = 0.0;         // exact dressed |0bar>, total
  double V1 = 0.0;         // exact dressed |1bar>, total
  double Vmw_exact = 0.0;  // V0 - V_Z - common
  double Vmw_pert = 0.0;   // perturbative |1,-1> shift, all coupled transitions
  double Vmw_pert_R = 0.0; // hbar |Omega_R|^2 / 4 Delta alone
  double Vmw_pert_scale = 0.0;  // sum of |individual perturbative terms|
  double V1mw_exact = 0.0;
  double V1mw_pert = 0.0;
  Complex rabi_R{0.0, 0.0};  // Omega_{1,-1}^{2,-1}, rad/s
  double detuning = 0.0;     // Delta_{1,-1}^{2,-1}, rad/s
  double ratio = 0.0;        // largest |Omega|/|Delta| over transitions coupled to |1,-1>
  bool ambiguous = false;
};

/// Evaluates the state-dependent potentials for one resolved configuration.
/// Construction runs the microwave calibration when the config asks for it
/// and fixes the drive frequency from the detuning at the trap minimum.
class PotentialModel {
 public:
  explicit PotentialModel(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const StaticTrapModel& trap() const { return trap_; }
  double drive_frequency() const { return omega_; }
  double microwave_current() const { return I_mw_; }

  FieldSample fields(const Vec3& r) const;
  RwaHamiltonian hamiltonian(const Vec3& r) const;
  RwaHamiltonian hamiltonian(const FieldSample& f) const;

  /// Gravity, V_e and Casimir-Polder (J); identical for all states.
  double common_terms(const Vec3& r, const FieldSample& f) const;

  /// Total potential of the dressed state adiabatically connected to
  /// `label`: E(label) -+ hbar Delta0/2 (F = 1 / F = 2) plus common terms.
  /// Labels follow `reference` when given (continuity along a sweep); the
  /// labelled spectrum is written to `labelled` when requested.
  double potential(const BareState& label, const Vec3& r, PotentialMode mode = PotentialMode::exact,
                   const DressedSpectrum* reference = nullptr, DressedSpectrum* labelled = nullptr) const;

  PotentialBreakdown breakdown(const Vec3& r, const DressedSpectrum* reference = nullptr,
                               DressedSpectrum* labelled = nullptr) const;

  /// Names of the terms that enter the potentials.
  std::vector<std::string> provenance() const;

 private:
  ExperimentConfig cfg_;
  StaticTrapModel trap_;
  double omega_ = 0.0;
  double I_mw_ = 0.0;
  bool mw_on_ = false;
};

/// Convenience wrapper constructing a PotentialModel for one evaluation.
double state_potential(const BareState& label, const Vec3& r, const ExperimentConfig& cfg,
                       PotentialMode mode = PotentialMode::exact);

/// Sampled potentials over a grid, J. Vectors are indexed by Grid3::index.
struct PotentialGrid {
  Grid3 grid;
  std::vector<double> V0, V1, Vmw_exact, Vmw_pert;
  std::vector<std::string> provenance;
};

/// Lines along x are independent (and run on `workers` threads); along a
/// line the dressed-state labels are carried from point to point.
PotentialGrid potential_slice(const PotentialModel& model, const Grid3& grid, unsigned workers = 1);
PotentialGrid potential_slice(const ExperimentConfig& cfg, const Grid3& grid, unsigned workers = 1);

}  // namespace chipdress
