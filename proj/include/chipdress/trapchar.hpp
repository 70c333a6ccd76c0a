#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "chipdress/config.hpp"
#include "chipdress/hyperfine.hpp"
#include "chipdress/types.hpp"

namespace chipdress {

using ScalarField = std::function<double(const Vec3&)>;

/// Tuning of find_minimum. Coordinates are divided by `length_scale`
/// internally; every other length below is in those scaled units.
struct MinimizerOptions {
  double length_scale = 1e-6;       // m
  double initial_step = 1.0;        // simplex edge
  double simplex_tolerance = 1e-6;  // simplex size at which descent stops
  double newton_tolerance = 1e-4;   // accepted final Newton step
  double gradient_step = 1e-3;
  double hessian_step = 0.05;
  int max_iterations = 5000;
  Vec3 lower = Vec3::Constant(-std::numeric_limits<double>::infinity());  // m
  Vec3 upper = Vec3::Constant(std::numeric_limits<double>::infinity());   // m
};

/// Local minimizer: Nelder-Mead descent, then Newton polish on finite
/// differences. Throws NumericalError on non-convergence or when the search
/// leaves [lower, upper].
Vec3 find_minimum(const ScalarField& f, const Vec3& x0, const MinimizerOptions& opts = {});

/// Central-difference Hessian with one Richardson step (h and h/2).
Mat3 finite_difference_hessian(const ScalarField& f, const Vec3& x, double h);

struct TrapReport {
  Vec3 minimum = Vec3::Zero();      // m
  double energy = 0.0;              // J
  Vec3 frequencies = Vec3::Zero();  // Hz, ascending
  Mat3 axes = Mat3::Identity();     // principal axes as columns
  double condition = 0.0;           // largest / smallest Hessian eigenvalue
  double gradient_norm = 0.0;       // J/m at the minimum
};

/// f_i = sqrt(lambda_i / m) / 2 pi from the Hessian eigenvalues at `minimum`
/// (step default 0.05 um). Throws NumericalError("saddle point") for a
/// non-positive eigenvalue.
TrapReport trap_frequencies(const ScalarField& potential, const Vec3& minimum, double mass, double step = 0.05e-6);

/// Result of the microwave calibration.
struct Calibration {
  double P_ref = 0.0;        // W
  double I_ref = 0.0;        // A, reference current at P_ref
  double Omega_ref = 0.0;    // rad/s, target |Omega_R(r_m)| at I_ref
  double ground_gap = 0.0;   // m, solved with the ideal partition
  double I_effective = 0.0;  // A, signal current giving Omega_ref with the configured partition
  double Omega_ideal = 0.0;  // rad/s, |Omega_R(r_m)| at I_ref with the ideal partition after the solve
  double residual = 0.0;     // Omega_ideal / Omega_ref - 1
  bool gap_solved = false;   // false when the configured gap was kept
  bool feasible = true;

  double current_for_power(double P) const;
};

/// |Omega_R(r_m)| (rad/s) for the configured geometry and signal current.
double rabi_at_minimum(const ExperimentConfig& cfg, double I_mw);

/// Solve the ground gap so that |Omega_R(r_m)| = Omega_ref at I_ref with the
/// ideal (0.5/0.5) partition, then rescale the current for the configured
/// partition. With auto_calibrate off the configured gap is kept; the report
/// still gives the current that would reproduce Omega_ref. Returns feasible = false (with the best
/// residual) when no gap in [gap_min, gap_max] works.
Calibration calibrate(const ExperimentConfig& cfg);

/// Config with the calibrated gap and effective current written in and
/// auto_calibrate cleared.
ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const Calibration& cal);

/// calibrate + apply when auto_calibrate is set; identity otherwise.
/// Throws NumericalError for an infeasible calibration.
ExperimentConfig resolve_calibration(const ExperimentConfig& cfg);

struct SplitResult {
  double s = 0.0;  // m, |x0 - x1|
  Vec3 min0 = Vec3::Zero();
  Vec3 min1 = Vec3::Zero();
};

/// Minima of V_|0bar> and V_|1bar> at power P (W) and detuning Delta_m
/// (rad/s). V_|0bar> is followed by continuation in power from r_m.
SplitResult splitting(const ExperimentConfig& cfg, double P_mw, double Delta_m);
double splitting_distance(const ExperimentConfig& cfg, double P_mw, double Delta_m);

struct SplitScanPoint {
  double P = 0.0;      // W
  double Delta = 0.0;  // rad/s
  double s = 0.0;      // m
};

/// Scan over the product of powers and detunings; output order is
/// detuning-major and independent of `workers`.
std::vector<SplitScanPoint> split_scan(const ExperimentConfig& cfg, const std::vector<double>& powers,
                                       const std::vector<double>& detunings, unsigned workers = 1);

}  // namespace chipdress
