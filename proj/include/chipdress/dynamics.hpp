#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "chipdress/config.hpp"
#include "chipdress/hyperfine.hpp"
#include "chipdress/types.hpp"

namespace chipdress {

class PotentialModel;

// ------------------------------------------------------------ 1D grids

/// Uniform periodic grid x_i = x0 + i dx, i = 0..n-1.
struct Grid1 {
  double x0 = 0.0;
  double dx = 1.0;
  int n = 0;

  double x(int i) const { return x0 + i * dx; }
  double length() const { return n * dx; }
  Eigen::VectorXd points() const;
};

/// Grid covering [x_min, x_max) with spacing close to dx and an even point
/// count. Throws ConfigError for an empty or inverted range.
Grid1 make_grid(double x_min, double x_max, double dx);

/// Samples on a uniform axis with piecewise-cubic Hermite interpolation;
/// node slopes come from fourth-order differences of the samples.
class Profile {
 public:
  Profile() = default;
  Profile(double x0, double dx, std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + dx_ * static_cast<double>(values_.size() - 1); }
  const std::vector<double>& values() const { return values_; }
  double sample_spacing() const { return dx_; }

  /// Position of the smallest value, refined by golden-section search on
  /// the interpolant.
  double argmin() const;

 private:
  void locate(double x, std::size_t& i, double& t) const;

  double x0_ = 0.0;
  double dx_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// 1D potential of the dressed state `label` along x. `valley` minimises over
/// (y, z) at every x (following the trap floor); `line` samples the straight
/// line through r_min.
Profile axial_profile(const PotentialModel& model, const BareState& label, double x_min, double x_max,
                      double dx, ProfileMode mode);

/// Microwave-off and microwave-on profiles of both states. The microwave
/// amplitude a(t) rises linearly from 0 to 1 over `switch_time`, the
/// dressed part of each potential scales with a^2.
struct AxialPotentials {
  Profile V0_off, V1_off, V0_on, V1_on;  // J, absolute
  double reference = 0.0;                 // J, subtracted gauge (minimum of V0_off)
  double switch_time = 0.0;               // s

  /// Potential of state 0 or 1 at amplitude fraction a, minus `reference`.
  double value(int state, double x, double a) const;
  double slope(int state, double x, double a) const;
  double amplitude(double t_since_on) const;
};

AxialPotentials make_axial_potentials(const ExperimentConfig& cfg);

// ------------------------------------------------------------ GPE

struct Interactions {
  double g00 = 0.0;  // J m
  double g11 = 0.0;
  double g01 = 0.0;
};

/// g_jk = 2 hbar omega_perp a_jk.
Interactions interactions_1d(const PhysicalConstants& c, double f_radial);

/// Two-component condensate on a 1D grid; psi normalised to atom numbers.
struct SpinorState {
  Grid1 grid;
  Eigen::VectorXcd psi0;
  Eigen::VectorXcd psi1;
  double t = 0.0;

  double N0() const;
  double N1() const;
  double N() const { return N0() + N1(); }
  double centroid0() const;
  double centroid1() const;
  /// <psi0|psi1> (integral, atoms).
  Complex overlap_amplitude() const;
  /// |<psi0|psi1>| / sqrt(N0 N1); 0 when either component is empty.
  double overlap() const;
  /// arg <psi0|psi1>.
  double relative_phase() const;
};

/// Resonant coherent coupling active during a step (rad/s, rad).
struct Drive {
  double rabi = 0.0;
  double phase = 0.0;
};

/// Symmetric (Strang) split-step Fourier propagator for the coupled 1D
/// mean-field equations. Holds FFT plans; not safe for concurrent use.
class SplitStepGpe {
 public:
  SplitStepGpe(const Grid1& grid, double mass, double hbar, const Interactions& g);

  const Grid1& grid() const { return grid_; }
  const Interactions& interactions() const { return g_; }
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }

  /// Real-time step; potentials are sampled on the grid (J).
  void step(SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt,
            const Drive& drive = {});

  /// Normalised imaginary-time step of a single component (norm restored
  /// to its value before the step).
  void imaginary_step(Eigen::VectorXcd& psi, const Eigen::VectorXd& V, double g, double dtau);

  /// Mean-field energy functional (J) of one component.
  double energy(const Eigen::VectorXcd& psi, const Eigen::VectorXd& V, double g);
  /// Total two-component energy (J), coupling term excluded.
  double energy(const SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1);

  /// Largest potential or kinetic phase advance per step (rad), measured
  /// where the density (position or momentum) exceeds 1e-10 of its peak.
  double max_phase_advance(const SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1,
                           double dt);

  Eigen::VectorXcd to_momentum(const Eigen::VectorXcd& psi);
  const Eigen::VectorXd& wavenumbers() const { return k_; }

 private:
  void kinetic(Eigen::VectorXcd& psi, double dt);
  void potential_half(SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt,
                      const Drive& drive);

  Grid1 grid_;
  double mass_;
  double hbar_;
  Interactions g_;
  Eigen::VectorXd k_;
  Eigen::FFT<double> fft_;
  double cached_dt_ = 0.0;
  Eigen::VectorXcd kinetic_phase_;
  Eigen::VectorXcd buffer_;
};

struct GroundStateReport {
  int steps = 0;
  double energy = 0.0;               // J
  std::vector<double> energies;      // per step
  bool monotone = true;              // energy never increased (beyond round-off)
};

/// Imaginary-time ground state of one component in potential V (grid
/// samples, J) with N atoms and coupling g. Stops when |dE/E| < tolerance
/// per step. Throws NumericalError("non-confining potential") when the
/// converged density reaches the grid edge.
Eigen::VectorXcd ground_state(SplitStepGpe& solver, const Eigen::VectorXd& V, double N, double g, double dtau,
                              GroundStateReport* report = nullptr, double tolerance = 1e-10,
                              int max_steps = 400000);

/// Instantaneous SU(2) rotation
///   U = [[cos a/2, -i e^{-i phi} sin a/2], [-i e^{i phi} sin a/2, cos a/2]].
/// Throws NumericalError for an area outside [0, 2 pi].
void apply_pulse(SpinorState& s, double area, double phase);

/// Finite-duration Rabi pulse at Omega = area / duration, integrated with
/// the propagator under static potentials V0, V1.
void apply_pulse_finite(SpinorState& s, double area, double phase, double duration, SplitStepGpe& solver,
                        const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt);

// ------------------------------------------------------------ sequences

struct PulseEvent {
  double area = 0.0;
  double phase = 0.0;
  double duration = 0.0;  // 0: instantaneous
};
/// Microwave amplitude ramp towards `on` (config power) or off, starting at
/// the current time; does not advance time.
struct MicrowaveEvent {
  bool on = true;
  double ramp_time = 0.0;
};
struct HoldEvent {
  double duration = 0.0;
  double probe_every = 0.0;       // > 0: record a virtual second pi/2 pulse
  double probe_phase_rate = 0.0;  // rad/s, probe pulse phase = rate * (t - hold start)
};
struct MeasureEvent {};

using SequenceEvent = std::variant<PulseEvent, MicrowaveEvent, HoldEvent, MeasureEvent>;

struct SequenceSchedule {
  std::vector<SequenceEvent> events;

  /// Non-negative durations, areas in [0, 2 pi]; throws ConfigError.
  void validate() const;
};

struct RamseyResult {
  double T_R = 0.0;      // s
  double N0 = 0.0;
  double N1 = 0.0;
  double overlap = 0.0;  // before the second pulse
  double phase = 0.0;    // relative phase before the second pulse
  double contrast = std::numeric_limits<double>::quiet_NaN();
};

struct TracePoint {
  double t = 0.0;
  double x0 = 0.0;  // m
  double x1 = 0.0;
  double N0 = 0.0;
  double N1 = 0.0;
  double overlap = 0.0;
};

struct SequenceOptions {
  bool interactions = true;
  bool static_state1 = false;    // hold V_|1bar> at its microwave-off profile
  double record_every = 10e-6;   // s, trace sampling
};

struct SequenceResult {
  std::vector<TracePoint> trace;
  std::vector<RamseyResult> measurements;  // Measure events and hold probes
  GroundStateReport ground;
  SpinorState final_state;
};

/// Prepare the ground state of |0> with the microwave off and run the
/// schedule. Potentials come from make_axial_potentials(cfg).
SequenceResult run_sequence(const ExperimentConfig& cfg, const SequenceSchedule& schedule,
                            const SequenceOptions& options = {});
SequenceResult run_sequence(const ExperimentConfig& cfg, const AxialPotentials& potentials,
                            const SequenceSchedule& schedule, const SequenceOptions& options = {});

/// LO detuning (rad/s) making the stationary fringe at r_min advance at the
/// configured fringe frequency; the configured value wins when present.
double lo_detuning(const ExperimentConfig& cfg);

/// pi/2 - [microwave on, hold T_R] - microwave off - pi/2(phase = d_LO T_R).
SequenceSchedule ramsey_schedule(const ExperimentConfig& cfg, double T_R, double lo, bool finite_pulses = false);

RamseyResult ramsey_run(const ExperimentConfig& cfg, double T_R, const SequenceOptions& options = {});

/// One trajectory with a virtual second pulse every TR_step up to TR_max.
SequenceResult ramsey_scan(const ExperimentConfig& cfg, const SequenceOptions& options = {});

/// sigma(N1)/mean(N1) over samples with |T_j - T_i| <= window/2. Throws
/// NumericalError when a window holds fewer than 4 samples.
std::vector<double> contrast_measure(const std::vector<RamseyResult>& results, double window);

struct RecurrenceReport {
  double T_peak = 0.0;  // s
  double peak = 0.0;
  double floor = 0.0;   // mean over [0.4, 0.6] T_peak
  double ratio = 0.0;   // peak / floor
};

/// Highest contrast measure at T_R >= t_min.
RecurrenceReport find_recurrence(const std::vector<RamseyResult>& results, const std::vector<double>& measure,
                                 double t_min = 5e-3);

// ------------------------------------------------------------ classical

struct ClassicalTrajectory {
  std::vector<double> t, x0, x1;  // s, m
};

/// Velocity-Verlet integration of m x'' = -dV/dx in the 1D profiles, both
/// states starting at rest at the microwave-off minimum, microwave switched
/// on at t = 0.
ClassicalTrajectory com_trajectory(const ExperimentConfig& cfg, double T, double dt = 0.0);
ClassicalTrajectory com_trajectory(const AxialPotentials& potentials, double mass, double T, double dt,
                                   std::optional<double> start = std::nullopt);

struct SinusoidFit {
  double frequency = 0.0;     // Hz
  double amplitude = 0.0;     // m
  double offset = 0.0;        // m
  double peak_to_peak = 0.0;  // m, of the data
  double rms_residual = 0.0;  // m
};

/// Least-squares x(t) = c + a cos wt + b sin wt with w refined around
/// `frequency_guess` (Hz).
SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& x, double frequency_guess);

// ------------------------------------------------------------ adiabaticity

enum class MotionalRegime { sudden, intermediate, adiabatic };
std::string to_string(MotionalRegime r);

struct RampReport {
  double ramp_time = 0.0;       // s
  double internal_ratio = 0.0;  // max(|dOmega/dt|, |dDelta/dt|) / gap^2
  bool internal_adiabatic = true;
  double trap_period = 0.0;     // s, axial period of V_|0bar> at the final power
  MotionalRegime motional = MotionalRegime::intermediate;
};

/// Ramp of the Rabi amplitude from 0 to its full value at r_min over
/// ramp_time with fixed detuning. Internal: flagged when ratio > 0.1.
/// Motional: sudden below 0.1 trap periods, adiabatic above 10.
RampReport check_ramp(const ExperimentConfig& cfg, double ramp_time);

/// One report per MicrowaveEvent that switches on.
std::vector<RampReport> check_adiabaticity(const ExperimentConfig& cfg, const SequenceSchedule& schedule);

}  // namespace chipdress
