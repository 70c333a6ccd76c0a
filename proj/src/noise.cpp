#include "chipdress/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chipdress/dynamics.hpp"
#include "chipdress/error.hpp"
#include "chipdress/magnetostatics.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/trapchar.hpp"

namespace chipdress {

ExperimentConfig perturbed_config(const ExperimentConfig& resolved, const PhaseOverrides& o) {
  ExperimentConfig out = resolved;
  if (o.dB != 0.0) {
    const StaticTrapModel trap = StaticTrapModel::from_config(resolved);
    const Vec3 B = trap.field(resolved.trap.r_min);
    out.trap.bias += o.dB * B.normalized();
    const double B_new = StaticTrapModel::from_config(out).field(resolved.trap.r_min).norm();
    const auto& c = resolved.constants;
    out.microwave.detuning += c.mu_B * (B_new - B.norm()) / c.hbar;
  }
  out.microwave.power += o.dP;
  if (out.microwave.power < 0.0) throw ConfigError("perturbed power is negative");
  return out;
}

double accumulated_phase(const ExperimentConfig& cfg, double t0, double t1, const PhaseOverrides& o) {
  if (!(t0 >= 0.0 && t1 >= t0)) throw ConfigError("accumulated_phase: need 0 <= t0 <= t1");
  const ExperimentConfig nominal = resolve_calibration(cfg);
  const double lo = lo_detuning(nominal);
  const ExperimentConfig p = perturbed_config(nominal, o);
  const AxialPotentials pot = make_axial_potentials(p);
  const double dt = p.dynamics.dt;
  const long i0 = std::lround(t0 / dt), i1 = std::lround(t1 / dt);
  const ClassicalTrajectory tr = com_trajectory(pot, p.constants.mass, static_cast<double>(i1) * dt, dt);

  auto dV = [&](long i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double a = pot.amplitude(tr.t[k]);
    return pot.value(1, tr.x1[k], a) - pot.value(0, tr.x0[k], a);
  };
  double sum = 0.0;
  for (long i = i0; i < i1; ++i) sum += 0.5 * (dV(i) + dV(i + 1));
  return sum * dt / p.constants.hbar + lo * (t1 - t0);
}

Sensitivity sensitivity(const ExperimentConfig& cfg, double T_R, NoiseSource which, unsigned workers) {
  const ExperimentConfig nominal = resolve_calibration(cfg);
  Sensitivity s;
  s.steps = which == NoiseSource::field ? std::array<double, 3>{0.3e-7, 1e-7, 3e-7}
                                        : std::array<double, 3>{0.3e-3, 1e-3, 3e-3};
  std::array<double, 6> phi{};
  parallel_for(phi.size(), workers, [&](std::size_t k) {
    const double h = (k % 2 ? -1.0 : 1.0) * s.steps[k / 2];
    PhaseOverrides o;
    (which == NoiseSource::field ? o.dB : o.dP) = h;
    phi[k] = accumulated_phase(nominal, T_R, o);
  });
  for (std::size_t j = 0; j < 3; ++j) s.estimates[j] = (phi[2 * j] - phi[2 * j + 1]) / (2.0 * s.steps[j]);
  s.derivative = s.estimates[1];
  for (double e : s.estimates)
    s.spread = std::max(s.spread, std::abs(e - s.derivative) / std::max(std::abs(s.derivative), 1e-300));
  if (s.spread > 0.02 && std::abs(s.derivative) > 0.0)
    throw NumericalError("sensitivity: finite-difference step study disagrees by " +
                         std::to_string(100.0 * s.spread) + "%");
  return s;
}

double default_observed_noise() { return 0.037 * std::numbers::pi / 0.30; }

NoiseBudget combine_budget(double dphi_dB, double dphi_dP, const NoiseConfig& n, double N) {
  if (n.dB < 0.0 || n.dP < 0.0 || n.dN < 0.0 || !(N > 0.0))
    throw ConfigError("noise budget: fluctuations must be >= 0 and N > 0");
  NoiseBudget b;
  b.T_R = n.TR;
  b.dphi_dB = dphi_dB;
  b.dphi_dP = dphi_dP;
  b.dphi_dN = n.dphi_dN;
  b.dB = n.dB, b.dP = n.dP, b.N = N, b.dN = n.dN;
  b.phi_B = std::abs(dphi_dB) * n.dB;
  b.phi_P = std::abs(dphi_dP) * n.dP;
  b.phi_S = 1.0 / std::sqrt(N);
  b.phi_N = std::abs(n.dphi_dN) * n.dN;
  b.total = std::sqrt(b.phi_B * b.phi_B + b.phi_P * b.phi_P + b.phi_S * b.phi_S + b.phi_N * b.phi_N);
  b.observed = n.observed > 0.0 ? n.observed : default_observed_noise();
  b.fraction = b.total / b.observed;
  return b;
}

NoiseBudget budget(const ExperimentConfig& cfg, double T_R, unsigned workers) {
  const double T = T_R > 0.0 ? T_R : cfg.noise.TR;
  const Sensitivity sB = sensitivity(cfg, T, NoiseSource::field, workers);
  const Sensitivity sP = sensitivity(cfg, T, NoiseSource::power, workers);
  NoiseConfig n = cfg.noise;
  n.TR = T;
  return combine_budget(sB.derivative, sP.derivative, n, cfg.dynamics.atom_number);
}

}  // namespace chipdress
