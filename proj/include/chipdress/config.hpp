#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chipdress/constants.hpp"
#include "chipdress/geometry.hpp"
#include "chipdress/types.hpp"

namespace chipdress {

enum class TrapMode { parametric, wires };
enum class ZeemanModel { linear, breit_rabi };
enum class ProfileMode { valley, line };

struct StaticTrapConfig {
  TrapMode mode = TrapMode::parametric;
  double B0 = 3.23e-4;                     // T
  Vec3 r_min{-12e-6, 0.0, 44e-6};          // m
  double f_axial = 109.0;                  // Hz, along x
  double f_radial = 500.0;                 // Hz
  std::vector<WireSegment> wires;          // wire mode only
  Vec3 bias = Vec3::Zero();                // T, uniform field added in both modes
};

struct MicrowaveConfig {
  bool enabled = true;
  double power = 0.120;                    // W
  double detuning = 0.0;                   // rad/s, Delta at r_min
  double P_ref = 0.120;                    // W
  double I_ref = 0.076;                    // A
  double Omega_ref = 0.0;                  // rad/s, |Omega_R(r_min)| at I_ref
  double impedance = 70.0;                 // Ohm
  bool auto_calibrate = true;
  double gap_min = 0.5e-6;                 // m, calibration bracket
  double gap_max = 40e-6;
};

struct PotentialTermsConfig {
  bool gravity = false;
  Vec3 gravity_direction{0.0, 0.0, -1.0};
  bool electric = false;
  bool casimir_polder = true;
  double cp_cutoff = 0.5e-6;               // m
  ZeemanModel zeeman = ZeemanModel::linear;
};

struct DynamicsConfig {
  int atom_number = 400;
  double x_min = -42e-6;                   // m, absolute chip coordinates
  double x_max = 18e-6;
  double dx = 0.05e-6;
  double dt = 1e-6;
  double imag_dt = 5e-6;
  double profile_dx = 0.1e-6;
  double switch_time = 50e-6;
  ProfileMode profile = ProfileMode::valley;
};

struct RamseyConfig {
  double pi2_duration = 170e-6;
  double fringe_frequency = 1.0 / 150e-6;  // Hz
  std::optional<double> lo_detuning;       // rad/s; derived when absent
  double TR_max = 12e-3;
  double TR_step = 10e-6;
  double window = 150e-6;
};

struct NoiseConfig {
  double dB = 0.2e-7;                      // T rms
  double dP = 20e-6;                       // W rms
  double dN = 21.0;
  double dphi_dN = 0.0;                    // rad per atom
  double TR = 8.4e-3;
  double observed = 0.0;                   // rad; derived when zero
};

/// Fully resolved experiment description, SI units throughout.
struct ExperimentConfig {
  PhysicalConstants constants;
  StaticTrapConfig trap;
  CpwGeometry cpw;
  MicrowaveConfig microwave;
  PotentialTermsConfig terms;
  DynamicsConfig dynamics;
  RamseyConfig ramsey;
  NoiseConfig noise;

  bool microwave_on() const { return microwave.enabled && microwave.power > 0.0; }

  /// Throws ConfigError naming the field and the violated bound.
  void validate() const;
};

/// Parse a config document (external units, unit-suffixed keys). Missing
/// keys take the defaults of the bundled configuration.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Inverse of config_from_json: every field, in external units.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Built-in defaults (identical to configs/paper.json).
ExperimentConfig default_config();

/// Path of the bundled configuration.
std::filesystem::path bundled_config_path();

/// Drive frequency omega such that
/// Delta(r_min) = omega - omega_hfs + mu_B B / hbar equals `detuning`.
double resolve_drive_frequency(const PhysicalConstants& c, double detuning, double B_at_minimum);

/// Delta(r) for the |1,-1> <-> |2,-1> transition at field magnitude B.
double local_detuning(const PhysicalConstants& c, double omega, double B);

}  // namespace chipdress
