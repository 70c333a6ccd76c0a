// Acceptance checks: one PASS/FAIL line per criterion, tolerances pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>

#include "chipdress/dynamics.hpp"
#include "chipdress/noise.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/potentials.hpp"
#include "chipdress/trapchar.hpp"
#include "chipdress/units.hpp"

using namespace chipdress;
namespace u = chipdress::units;

namespace {

constexpr double pi = std::numbers::pi;

// 1. calibration
constexpr double kOmegaTarget_kHz = 122.0;
constexpr double kCalibrationTol = 0.01;
constexpr double kLinearityTol = 1e-6;
constexpr double kCalibrationTime = 1.0;  // s
// 2. splitting
constexpr double kSplitTarget_um = 9.4;
constexpr double kSplitTol = 0.15;
constexpr double kSmallPowerFraction = 0.05;  // s(1 mW) / s(120 mW)
constexpr double kCollapseTol = 0.05;
constexpr double kCollapseMaxRatio = 0.3;
constexpr double kScanTime = 30.0;
// 3. potentials
constexpr double kPertMaxRatio = 0.2;
constexpr int kSlicePoints = 200;
constexpr double kSliceTime = 5.0;
// 4. dynamics
constexpr double kOscFreq = 116.0, kOscFreqTol = 0.05;
constexpr double kP2P_um = 8.5, kP2PTol = 0.10;
constexpr double kRecurrence_ms = 8.6, kRecurrenceTol_ms = 0.3;
constexpr double kRecurrenceContrast = 3.0;
constexpr double kDynamicsTime = 300.0;
// 5. noise (units of pi)
constexpr double kPhiB = 0.03, kPhiBTol = 0.005;
constexpr double kPhiP = 0.01, kPhiPTol = 0.005;
constexpr double kTotal = 0.037, kTotalTol = 0.005;
constexpr double kFraction = 0.30, kFractionTol = 0.05;
constexpr double kSensitivityFactor = 2.0;  // around 2 pi / 16 mG
constexpr double kNoiseTime = 60.0;
// 6. property suite
constexpr double kSuiteTime = 600.0;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool within(double x, double target, double rel) { return std::abs(x / target - 1.0) <= rel; }

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void calibration() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = default_config();
  const Calibration cal = calibrate(cfg);
  const ExperimentConfig r = apply_calibration(cfg, cal);
  const double omega = rabi_at_minimum(r, r.microwave.I_ref);
  double lin = 0.0;
  for (double k : {0.25, 0.5, 2.0, 4.0})
    lin = std::max(lin, std::abs(rabi_at_minimum(r, k * r.microwave.I_ref) / (k * omega) - 1.0));
  const double dt = since(t0);
  const double ideal_kHz = cal.Omega_ideal / u::two_pi / u::kHz;
  const double mode_kHz = omega / u::two_pi / u::kHz;
  const bool ok = cal.feasible && within(ideal_kHz, kOmegaTarget_kHz, kCalibrationTol) &&
                  within(mode_kHz, kOmegaTarget_kHz, kCalibrationTol) && lin <= kLinearityTol &&
                  dt < kCalibrationTime;
  report(1, ok, "calibration",
         fmt("Omega_R(r_m) at 76 mA = 2pi x %.4f kHz (configured mode %.4f kHz at %.3f mA), "
             "linearity error %.1e, gap %.3f um, %.3f s",
             ideal_kHz, mode_kHz, r.microwave.I_ref / u::mA, lin, cal.ground_gap / u::um, dt));
}

void splitting_check() {
  const ExperimentConfig cfg = resolve_calibration(default_config());
  const double D150 = u::angular_from_kHz(150);
  const double s120 = splitting_distance(cfg, 0.120, D150) / u::um;
  const double s1 = splitting_distance(cfg, 0.001, D150) / u::um;
  const double s0 = splitting_distance(cfg, 0.0, D150) / u::um;

  // Collapse at matched P/Delta, restricted to Omega/Delta <= 0.3 on every curve.
  double worst = 0.0;
  int compared = 0;
  for (double ratio : {0.02, 0.05, 0.08, 0.1}) {  // mW per kHz
    std::vector<double> s;
    bool valid = true;
    for (double D_kHz : {150.0, 300.0, 600.0}) {
      const double P = ratio * D_kHz * u::mW;
      const double W = cfg.microwave.Omega_ref * std::sqrt(P / cfg.microwave.P_ref);
      if (W / u::angular_from_kHz(D_kHz) > kCollapseMaxRatio) valid = false;
      s.push_back(splitting_distance(cfg, P, u::angular_from_kHz(D_kHz)));
    }
    if (!valid) continue;
    ++compared;
    for (double v : s) worst = std::max(worst, std::abs(v / s[0] - 1.0));
  }

  const auto t0 = Clock::now();
  std::vector<double> powers;
  for (int i = 1; i <= 10; ++i) powers.push_back(0.020 * i);
  const auto scan = split_scan(cfg, powers, {D150, 2 * D150, 4 * D150}, default_workers());
  const double dt = since(t0);

  const bool ok = within(s120, kSplitTarget_um, kSplitTol) && s1 < kSmallPowerFraction * s120 && s0 < 1e-3 &&
                  compared > 0 && worst <= kCollapseTol && scan.size() == 30 && dt < kScanTime;
  report(2, ok, "splitting",
         fmt("s(120 mW, 150 kHz) = %.3f um (target %.1f +- %.0f%%), s(1 mW) = %.4f um, s(0) = %.1e um, "
             "collapse deviation %.2f%% over %d P/Delta values, 30-point scan %.2f s",
             s120, kSplitTarget_um, 100 * kSplitTol, s1, s0, 100 * worst, compared, dt));
}

void potentials_check() {
  const auto t0 = Clock::now();
  int checked = 0, bad = 0;
  double worst = 0.0;  // |exact - pert| / (ratio^2 |exact|)
  for (double D_kHz : {150.0, 600.0}) {
    ExperimentConfig cfg = default_config();
    cfg.microwave.detuning = u::angular_from_kHz(D_kHz);
    const PotentialModel m(cfg);
    const Vec3& r0 = m.config().trap.r_min;
    for (int i = 0; i < kSlicePoints; ++i) {
      const Vec3 r(-40e-6 + i * 60e-6 / (kSlicePoints - 1), r0.y(), r0.z());
      const PotentialBreakdown b = m.breakdown(r);
      if (b.ratio > kPertMaxRatio) continue;
      ++checked;
      // Sum over coupled transitions; off axis the sigma terms dominate and can cancel.
      const double scale = std::max(std::abs(b.Vmw_exact), b.Vmw_pert_scale);
      const double rel = std::abs(b.Vmw_exact - b.Vmw_pert) / scale;
      worst = std::max(worst, rel / (b.ratio * b.ratio));
      if (rel > b.ratio * b.ratio) ++bad;
    }
  }
  const double dt = since(t0);
  report(3, checked > 0 && bad == 0 && dt < kSliceTime, "potentials",
         fmt("%d of 2 x %d slice points with Omega/Delta <= %.1f, %d outside (Omega/Delta)^2 "
             "(worst %.2f of the bound), %.2f s",
             checked, kSlicePoints, kPertMaxRatio, bad, worst, dt));
}

void dynamics_check() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = resolve_calibration(default_config());
  const AxialPotentials p = make_axial_potentials(cfg);
  const double shift = std::abs(p.V0_on.argmin() - p.V0_off.argmin()) / u::um;

  SequenceSchedule s;
  s.events.push_back(PulseEvent{0.5 * pi, 0.0, 0.0});
  s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
  s.events.push_back(HoldEvent{cfg.ramsey.TR_max, cfg.ramsey.TR_step, lo_detuning(cfg)});
  const SequenceResult res = run_sequence(cfg, p, s);
  const double dt = since(t0);

  std::vector<double> t, x;
  for (const auto& q : res.trace)
    if (q.t <= 10e-3 + 1e-9) t.push_back(q.t), x.push_back(q.x0);
  const SinusoidFit fit = fit_sinusoid(t, x, kOscFreq);
  const auto measure = contrast_measure(res.measurements, cfg.ramsey.window);
  const RecurrenceReport rec = find_recurrence(res.measurements, measure);

  const bool ok = within(fit.frequency, kOscFreq, kOscFreqTol) &&
                  within(fit.peak_to_peak / u::um, kP2P_um, kP2PTol) &&
                  std::abs(rec.T_peak / u::ms - kRecurrence_ms) <= kRecurrenceTol_ms &&
                  rec.ratio > kRecurrenceContrast && dt < kDynamicsTime;
  report(4, ok, "dynamics",
         fmt("V0 shift %.2f um; centroid %.2f Hz (116 +- 5%%), p2p %.3f um (8.5 +- 10%%); "
             "recurrence at %.2f ms (8.6 +- 0.3), peak/floor %.1f; %.1f s",
             shift, fit.frequency, fit.peak_to_peak / u::um, rec.T_peak / u::ms, rec.ratio, dt));
}

void noise_check() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = default_config();
  const NoiseBudget b = budget(cfg, 8.4e-3, default_workers());
  const double dt = since(t0);
  const double ref = u::two_pi / (16 * u::mG);
  const double sens = std::abs(b.dphi_dB) / ref;
  const bool ok = std::abs(b.phi_B / pi - kPhiB) <= kPhiBTol && std::abs(b.phi_P / pi - kPhiP) <= kPhiPTol &&
                  b.phi_S == 1.0 / std::sqrt(400.0) && std::abs(b.total / pi - kTotal) <= kTotalTol &&
                  std::abs(b.fraction - kFraction) <= kFractionTol && sens <= kSensitivityFactor &&
                  sens >= 1.0 / kSensitivityFactor && dt < kNoiseTime;
  report(5, ok, "noise budget",
         fmt("dphi/dB = %.3f x (2pi/16 mG); phi_B %.4f pi (0.03 +- 0.005), phi_P %.4f pi (0.01 +- 0.005), "
             "phi_S %.4f rad, total %.4f pi (0.037 +- 0.005), observed fraction %.3f (0.30 +- 0.05); %.1f s",
             sens, b.phi_B / pi, b.phi_P / pi, b.phi_S, b.total / pi, b.fraction, dt));
}

void property_suite() {
  const auto t0 = Clock::now();
  const std::string cmd = std::string(CHIPDRESS_TESTS_PATH) + " --test-suite=property --minimal > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double dt = since(t0);
  report(6, status == 0 && dt < kSuiteTime, "property suite",
         fmt("exit status %d, %.1f s (limit %.0f s)", status, dt, kSuiteTime));
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)()> checks[] = {
      {"calibration", calibration},   {"splitting", splitting_check}, {"potentials", potentials_check},
      {"dynamics", dynamics_check},   {"noise budget", noise_check},  {"property suite", property_suite}};
  int id = 1;
  for (const auto& [name, fn] : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, name, std::string("exception: ") + e.what());
    }
    ++id;
  }
  return failures == 0 ? 0 : 1;
}
