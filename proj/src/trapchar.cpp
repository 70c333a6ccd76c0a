#include "chipdress/trapchar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "chipdress/error.hpp"
#include "chipdress/log.hpp"
#include "chipdress/magnetostatics.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/potentials.hpp"
#include "chipdress/units.hpp"

namespace chipdress {

// ------------------------------------------------------------ minimizer

namespace {

struct Scaled {
  const ScalarField& f;
  const MinimizerOptions& o;
  int evaluations = 0;

  Vec3 to_si(const Vec3& u) const { return u * o.length_scale; }
  double operator()(const Vec3& u) {
    const Vec3 x = to_si(u);
    for (int a = 0; a < 3; ++a)
      if (x(a) < o.lower(a) || x(a) > o.upper(a)) throw NumericalError("find_minimum: search escaped the domain");
    ++evaluations;
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("find_minimum: non-finite potential value");
    return v;
  }
};

Vec3 nelder_mead(Scaled& f, const Vec3& u0, const MinimizerOptions& o) {
  std::array<Vec3, 4> p;
  std::array<double, 4> v;
  p[0] = u0;
  for (int i = 0; i < 3; ++i) {
    p[i + 1] = u0;
    p[i + 1](i) += o.initial_step;
  }
  for (int i = 0; i < 4; ++i) v[i] = f(p[i]);

  for (int it = 0; it < o.max_iterations; ++it) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::array<Vec3, 4> ps;
    std::array<double, 4> vs;
    for (int i = 0; i < 4; ++i) {
      ps[i] = p[idx[i]];
      vs[i] = v[idx[i]];
    }
    p = ps;
    v = vs;

    double size = 0.0;
    for (int i = 1; i < 4; ++i) size = std::max(size, (p[i] - p[0]).norm());
    if (size < o.simplex_tolerance) return p[0];

    const Vec3 centroid = (p[0] + p[1] + p[2]) / 3.0;
    const Vec3 xr = centroid + (centroid - p[3]);
    const double fr = f(xr);
    if (fr < v[0]) {
      const Vec3 xe = centroid + 2.0 * (centroid - p[3]);
      const double fe = f(xe);
      if (fe < fr) {
        p[3] = xe;
        v[3] = fe;
      } else {
        p[3] = xr;
        v[3] = fr;
      }
    } else if (fr < v[2]) {
      p[3] = xr;
      v[3] = fr;
    } else {
      const bool outside = fr < v[3];
      const Vec3 xc = outside ? Vec3(centroid + 0.5 * (xr - centroid)) : Vec3(centroid + 0.5 * (p[3] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : v[3])) {
        p[3] = xc;
        v[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          p[i] = p[0] + 0.5 * (p[i] - p[0]);
          v[i] = f(p[i]);
        }
      }
    }
  }
  throw NumericalError("find_minimum: simplex descent did not converge in " + std::to_string(o.max_iterations) +
                       " iterations");
}

template <typename F>
Vec3 gradient(F& f, const Vec3& u, double h) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 up = u, dn = u;
    up(a) += h;
    dn(a) -= h;
    g(a) = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

template <typename F>
Mat3 plain_hessian(F& f, const Vec3& u, double h) {
  Mat3 H;
  const double f0 = f(u);
  for (int a = 0; a < 3; ++a) {
    Vec3 up = u, dn = u;
    up(a) += h;
    dn(a) -= h;
    H(a, a) = (f(up) - 2.0 * f0 + f(dn)) / (h * h);
    for (int b = a + 1; b < 3; ++b) {
      Vec3 pp = u, pm = u, mp = u, mm = u;
      pp(a) += h, pp(b) += h;
      pm(a) += h, pm(b) -= h;
      mp(a) -= h, mp(b) += h;
      mm(a) -= h, mm(b) -= h;
      H(a, b) = H(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace

Vec3 find_minimum(const ScalarField& f, const Vec3& x0, const MinimizerOptions& o) {
  Scaled sf{f, o};
  Vec3 u = nelder_mead(sf, x0 / o.length_scale, o);

  // Newton polish.
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    const Vec3 g = gradient(sf, u, o.gradient_step);
    const Mat3 H = plain_hessian(sf, u, o.hessian_step);
    const Eigen::LLT<Mat3> llt(H);
    if (llt.info() != Eigen::Success) break;  // not locally convex; keep the simplex result
    const Vec3 step = -llt.solve(g);
    last_step = step.norm();
    if (last_step < 1e-9) break;
    const double f0 = sf(u);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12; ++k, t *= 0.5) {
      const Vec3 trial = u + t * step;
      if (sf(trial) <= f0) {
        u = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // round-off floor reached
  }

  const Vec3 g = gradient(sf, u, o.gradient_step);
  const Mat3 H = plain_hessian(sf, u, o.hessian_step);
  const Eigen::LLT<Mat3> llt(H);
  if (llt.info() == Eigen::Success) {
    const double residual = llt.solve(g).norm();
    if (residual > o.newton_tolerance)
      throw NumericalError("find_minimum: gradient not converged (Newton residual " + std::to_string(residual) +
                           " in units of " + std::to_string(o.length_scale) + " m)");
  }
  log::debug("find_minimum: ", sf.evaluations, " evaluations");
  return sf.to_si(u);
}

Mat3 finite_difference_hessian(const ScalarField& f, const Vec3& x, double h) {
  const Mat3 coarse = plain_hessian(f, x, h);
  const Mat3 fine = plain_hessian(f, x, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

TrapReport trap_frequencies(const ScalarField& potential, const Vec3& minimum, double mass, double step) {
  if (!(mass > 0.0) || !(step > 0.0)) throw NumericalError("trap_frequencies: mass and step must be > 0");
  const Mat3 H = finite_difference_hessian(potential, minimum, step);
  const Eigen::SelfAdjointEigenSolver<Mat3> es(H);
  const Vec3 lambda = es.eigenvalues();
  if (!(lambda(0) > 0.0)) throw NumericalError("trap_frequencies: saddle point (non-positive Hessian eigenvalue)");

  TrapReport rep;
  rep.minimum = minimum;
  rep.energy = potential(minimum);
  for (int i = 0; i < 3; ++i) rep.frequencies(i) = std::sqrt(lambda(i) / mass) / units::two_pi;
  rep.axes = es.eigenvectors();
  rep.condition = lambda(2) / lambda(0);
  Vec3 g;
  const double h = 1e-3 * step;
  for (int a = 0; a < 3; ++a) {
    Vec3 up = minimum, dn = minimum;
    up(a) += h;
    dn(a) -= h;
    g(a) = (potential(up) - potential(dn)) / (2.0 * h);
  }
  rep.gradient_norm = g.norm();
  return rep;
}

// ------------------------------------------------------------ calibration

double Calibration::current_for_power(double P) const {
  if (!(P >= 0.0)) throw NumericalError("current_for_power: P must be >= 0");
  return I_effective * std::sqrt(P / P_ref);
}

double rabi_at_minimum(const ExperimentConfig& cfg, double I_mw) {
  const StaticTrapModel trap = StaticTrapModel::from_config(cfg);
  const Vec3& r = cfg.trap.r_min;
  const CVec3 B_mw = cpw_microwave_field(cfg.cpw, I_mw, r, cfg.constants.mu0);
  return std::abs(rabi_frequency_R(trap.field(r), B_mw, cfg.constants));
}

Calibration calibrate(const ExperimentConfig& cfg) {
  const auto& mw = cfg.microwave;
  Calibration cal;
  cal.P_ref = mw.P_ref;
  cal.I_ref = mw.I_ref;
  cal.Omega_ref = mw.Omega_ref;
  cal.ground_gap = cfg.cpw.ground_gap;

  ExperimentConfig ideal = cfg;
  ideal.cpw.a1 = ideal.cpw.a2 = 0.5;
  auto mismatch = [&](double gap) {
    ideal.cpw.ground_gap = gap;
    return rabi_at_minimum(ideal, mw.I_ref) - mw.Omega_ref;
  };

  if (mw.auto_calibrate) {
    // Bracket on a coarse scan, then bisect.
    constexpr int n_scan = 80;
    double best_gap = mw.gap_min, best = std::abs(mismatch(mw.gap_min));
    double lo = mw.gap_min, f_lo = mismatch(lo);
    bool bracketed = false;
    double hi = lo;
    for (int i = 1; i <= n_scan && !bracketed; ++i) {
      hi = mw.gap_min + (mw.gap_max - mw.gap_min) * i / n_scan;
      const double f_hi = mismatch(hi);
      if (std::abs(f_hi) < best) best = std::abs(f_hi), best_gap = hi;
      if ((f_lo <= 0.0) != (f_hi <= 0.0)) {
        bracketed = true;
      } else {
        lo = hi;
        f_lo = f_hi;
      }
    }
    if (bracketed) {
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = mismatch(mid);
        if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
      }
      cal.ground_gap = 0.5 * (lo + hi);
      cal.gap_solved = true;
    } else {
      cal.ground_gap = best_gap;
      cal.feasible = false;
    }
  }

  ideal.cpw.ground_gap = cal.ground_gap;
  cal.Omega_ideal = rabi_at_minimum(ideal, mw.I_ref);
  cal.residual = cal.Omega_ideal / mw.Omega_ref - 1.0;
  if (cal.gap_solved && std::abs(cal.residual) > 1e-6) cal.feasible = false;

  ExperimentConfig mode = cfg;
  mode.cpw.ground_gap = cal.ground_gap;
  const double omega_mode = rabi_at_minimum(mode, mw.I_ref);
  if (!(omega_mode > 0.0)) throw NumericalError("calibrate: microwave field vanishes at the trap minimum");
  cal.I_effective = mw.I_ref * mw.Omega_ref / omega_mode;
  return cal;
}

ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const Calibration& cal) {
  ExperimentConfig out = cfg;
  out.cpw.ground_gap = cal.ground_gap;
  out.microwave.I_ref = cal.I_effective;
  out.microwave.auto_calibrate = false;
  return out;
}

ExperimentConfig resolve_calibration(const ExperimentConfig& cfg) {
  if (!cfg.microwave.auto_calibrate) return cfg;
  const Calibration cal = calibrate(cfg);
  if (!cal.feasible)
    throw ConfigError("calibrate: no ground gap in [" + std::to_string(cfg.microwave.gap_min / units::um) + ", " +
                         std::to_string(cfg.microwave.gap_max / units::um) +
                         "] um reproduces Omega_ref (best relative residual " + std::to_string(cal.residual) + ")");
  return apply_calibration(cfg, cal);
}

// ------------------------------------------------------------ splitting

namespace {

MinimizerOptions splitting_options() {
  MinimizerOptions o;
  o.lower = Vec3(-1e-3, -1e-3, 1e-6);
  o.upper = Vec3(1e-3, 1e-3, 1e-3);
  return o;
}

Vec3 minimum_of(const PotentialModel& model, const BareState& label, const Vec3& start) {
  return find_minimum([&](const Vec3& r) { return model.potential(label, r); }, start, splitting_options());
}

}  // namespace

SplitResult splitting(const ExperimentConfig& cfg, double P_mw, double Delta_m) {
  if (!(P_mw >= 0.0)) throw ConfigError("splitting: P_mw must be >= 0");
  ExperimentConfig base = resolve_calibration(cfg);
  base.microwave.enabled = true;
  base.microwave.detuning = Delta_m;
  base.microwave.power = P_mw;
  const Vec3 start = base.trap.r_min;

  SplitResult out;
  out.min1 = minimum_of(PotentialModel(base), state_1, start);

  // Follow |0bar> from the bare minimum while the power is raised.
  constexpr double stage_power = 0.040;
  const int stages = std::max(1, static_cast<int>(std::ceil(P_mw / stage_power)));
  Vec3 x = start;
  for (int k = 1; k <= stages; ++k) {
    ExperimentConfig stage = base;
    stage.microwave.power = P_mw * k / stages;
    x = minimum_of(PotentialModel(stage), state_0, x);
  }
  out.min0 = x;
  out.s = std::abs(out.min0.x() - out.min1.x());
  return out;
}

double splitting_distance(const ExperimentConfig& cfg, double P_mw, double Delta_m) {
  return splitting(cfg, P_mw, Delta_m).s;
}

std::vector<SplitScanPoint> split_scan(const ExperimentConfig& cfg, const std::vector<double>& powers,
                                       const std::vector<double>& detunings, unsigned workers) {
  const ExperimentConfig base = resolve_calibration(cfg);
  std::vector<SplitScanPoint> out(powers.size() * detunings.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const double D = detunings[i / powers.size()];
    const double P = powers[i % powers.size()];
    out[i] = {P, D, splitting_distance(base, P, D)};
  });
  return out;
}

}  // namespace chipdress
