#include "chipdress/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chipdress/error.hpp"
#include "chipdress/log.hpp"
#include "chipdress/potentials.hpp"
#include "chipdress/trapchar.hpp"
#include "chipdress/units.hpp"

namespace chipdress {

namespace {
constexpr Complex I1{0.0, 1.0};
constexpr double pi = std::numbers::pi;
}  // namespace

// ------------------------------------------------------------ 1D grids

Eigen::VectorXd Grid1::points() const {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = x(i);
  return p;
}

Grid1 make_grid(double x_min, double x_max, double dx) {
  if (!(x_max > x_min) || !(dx > 0.0)) throw ConfigError("grid: need x_max > x_min and dx > 0");
  int n = static_cast<int>(std::ceil((x_max - x_min) / dx - 1e-9));
  if (n % 2) ++n;
  if (n < 8) throw ConfigError("grid: fewer than 8 points");
  return Grid1{x_min, dx, n};
}

Profile::Profile(double x0, double dx, std::vector<double> values)
    : x0_(x0), dx_(dx), values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 5 || !(dx > 0.0)) throw NumericalError("profile: need >= 5 samples and dx > 0");
  const auto& f = values_;
  slopes_.assign(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    slopes_[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * dx);
  slopes_[1] = (f[2] - f[0]) / (2.0 * dx);
  slopes_[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * dx);
  slopes_[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  slopes_[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
}

void Profile::locate(double x, std::size_t& i, double& t) const {
  const double u = (x - x0_) / dx_;
  const double last = static_cast<double>(values_.size() - 1);
  if (!(u >= -1e-9 && u <= last + 1e-9))
    throw NumericalError("profile: x = " + std::to_string(x / units::um) + " um outside the sampled range");
  const double uc = std::clamp(u, 0.0, last);
  i = std::min(static_cast<std::size_t>(uc), values_.size() - 2);
  t = uc - static_cast<double>(i);
}

double Profile::operator()(double x) const {
  std::size_t i;
  double t;
  locate(x, i, t);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * dx_ * slopes_[i] +
         (-2 * t3 + 3 * t2) * values_[i + 1] + (t3 - t2) * dx_ * slopes_[i + 1];
}

double Profile::derivative(double x) const {
  std::size_t i;
  double t;
  locate(x, i, t);
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * values_[i] + (-6 * t2 + 6 * t) * values_[i + 1]) / dx_ +
         (3 * t2 - 4 * t + 1) * slopes_[i] + (3 * t2 - 2 * t) * slopes_[i + 1];
}

double Profile::argmin() const {
  const auto it = std::min_element(values_.begin(), values_.end());
  const double xc = x0_ + dx_ * static_cast<double>(it - values_.begin());
  double a = std::max(x_min(), xc - dx_), b = std::min(x_max(), xc + dx_);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = (*this)(c), fd = (*this)(d);
  for (int k = 0; k < 100 && b - a > 1e-12 * dx_; ++k) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = (*this)(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = (*this)(d);
    }
  }
  return 0.5 * (a + b);
}

namespace {

// Minimise V(x, y, z) over (y, z) by Newton iteration on finite differences.
Eigen::Vector2d valley_point(const PotentialModel& model, const BareState& label, double x,
                             Eigen::Vector2d yz, double& value) {
  constexpr double h = 0.02e-6;
  auto f = [&](const Eigen::Vector2d& p) { return model.potential(label, Vec3(x, p(0), p(1))); };
  for (int it = 0; it < 30; ++it) {
    const double f0 = f(yz);
    const double fpy = f(yz + Eigen::Vector2d(h, 0)), fmy = f(yz - Eigen::Vector2d(h, 0));
    const double fpz = f(yz + Eigen::Vector2d(0, h)), fmz = f(yz - Eigen::Vector2d(0, h));
    const double fpp = f(yz + Eigen::Vector2d(h, h)), fmm = f(yz - Eigen::Vector2d(h, h));
    const double fpm = f(yz + Eigen::Vector2d(h, -h)), fmp = f(yz + Eigen::Vector2d(-h, h));
    const Eigen::Vector2d g((fpy - fmy) / (2 * h), (fpz - fmz) / (2 * h));
    Eigen::Matrix2d H;
    H(0, 0) = (fpy - 2 * f0 + fmy) / (h * h);
    H(1, 1) = (fpz - 2 * f0 + fmz) / (h * h);
    H(0, 1) = H(1, 0) = (fpp - fpm - fmp + fmm) / (4 * h * h);
    if (!(H(0, 0) > 0.0 && H.determinant() > 0.0))
      throw NumericalError("valley profile: transverse potential not confining at x = " +
                           std::to_string(x / units::um) + " um");
    const Eigen::Vector2d step = -H.ldlt().solve(g);
    yz += step;
    if (step.norm() < 1e-12) {
      value = f(yz);
      return yz;
    }
  }
  throw NumericalError("valley profile: transverse minimisation did not converge");
}

}  // namespace

Profile axial_profile(const PotentialModel& model, const BareState& label, double x_min, double x_max, double dx,
                      ProfileMode mode) {
  if (!(x_max > x_min) || !(dx > 0.0)) throw ConfigError("profile: need x_max > x_min and dx > 0");
  const int n = std::max(5, static_cast<int>(std::ceil((x_max - x_min) / dx - 1e-9)) + 1);
  const double h = (x_max - x_min) / (n - 1);
  std::vector<double> v(static_cast<std::size_t>(n));
  const Vec3& r0 = model.config().trap.r_min;

  if (mode == ProfileMode::line) {
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = model.potential(label, Vec3(x_min + i * h, r0.y(), r0.z()));
    return Profile(x_min, h, std::move(v));
  }

  const int i0 = std::clamp(static_cast<int>(std::lround((r0.x() - x_min) / h)), 0, n - 1);
  Eigen::Vector2d start(r0.y(), r0.z());
  Eigen::Vector2d yz = valley_point(model, label, x_min + i0 * h, start, v[static_cast<std::size_t>(i0)]);
  const Eigen::Vector2d centre = yz;
  for (int i = i0 + 1; i < n; ++i) yz = valley_point(model, label, x_min + i * h, yz, v[static_cast<std::size_t>(i)]);
  yz = centre;
  for (int i = i0 - 1; i >= 0; --i) yz = valley_point(model, label, x_min + i * h, yz, v[static_cast<std::size_t>(i)]);
  return Profile(x_min, h, std::move(v));
}

double AxialPotentials::amplitude(double t_since_on) const {
  if (t_since_on <= 0.0) return switch_time > 0.0 ? 0.0 : 1.0;
  if (switch_time <= 0.0 || t_since_on >= switch_time) return 1.0;
  return t_since_on / switch_time;
}

double AxialPotentials::value(int state, double x, double a) const {
  const Profile& off = state == 0 ? V0_off : V1_off;
  const Profile& on = state == 0 ? V0_on : V1_on;
  const double vo = off(x);
  return vo + a * a * (on(x) - vo) - reference;
}

double AxialPotentials::slope(int state, double x, double a) const {
  const Profile& off = state == 0 ? V0_off : V1_off;
  const Profile& on = state == 0 ? V0_on : V1_on;
  const double d = off.derivative(x);
  return d + a * a * (on.derivative(x) - d);
}

AxialPotentials make_axial_potentials(const ExperimentConfig& cfg) {
  const ExperimentConfig resolved = resolve_calibration(cfg);
  const auto& d = resolved.dynamics;
  const Grid1 grid = make_grid(d.x_min, d.x_max, d.dx);
  const double lo = grid.x(0), hi = grid.x(grid.n - 1);

  ExperimentConfig off_cfg = resolved;
  off_cfg.microwave.enabled = false;
  const PotentialModel off(off_cfg);

  AxialPotentials p;
  p.switch_time = d.switch_time;
  p.V0_off = axial_profile(off, state_0, lo, hi, d.profile_dx, d.profile);
  p.V1_off = resolved.terms.zeeman == ZeemanModel::linear ? p.V0_off
                                                          : axial_profile(off, state_1, lo, hi, d.profile_dx, d.profile);
  if (resolved.microwave_on()) {
    const PotentialModel on(resolved);
    p.V0_on = axial_profile(on, state_0, lo, hi, d.profile_dx, d.profile);
    p.V1_on = axial_profile(on, state_1, lo, hi, d.profile_dx, d.profile);
  } else {
    p.V0_on = p.V0_off;
    p.V1_on = p.V1_off;
  }
  const auto& v = p.V0_off.values();
  p.reference = *std::min_element(v.begin(), v.end());
  return p;
}

// ------------------------------------------------------------ GPE

Interactions interactions_1d(const PhysicalConstants& c, double f_radial) {
  const double w = units::two_pi * f_radial;
  return {2.0 * c.hbar * w * c.a00, 2.0 * c.hbar * w * c.a11, 2.0 * c.hbar * w * c.a01};
}

double SpinorState::N0() const { return psi0.squaredNorm() * grid.dx; }
double SpinorState::N1() const { return psi1.squaredNorm() * grid.dx; }

namespace {
double centroid(const Eigen::VectorXcd& psi, const Grid1& g) {
  double w = 0.0, s = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double d = std::norm(psi(i));
    w += d;
    s += d * g.x(i);
  }
  return w > 0.0 ? s / w : std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

double SpinorState::centroid0() const { return centroid(psi0, grid); }
double SpinorState::centroid1() const { return centroid(psi1, grid); }
Complex SpinorState::overlap_amplitude() const { return psi0.dot(psi1) * grid.dx; }

double SpinorState::overlap() const {
  const double n0 = N0(), n1 = N1();
  if (n0 <= 0.0 || n1 <= 0.0) return 0.0;
  return std::min(1.0, std::abs(overlap_amplitude()) / std::sqrt(n0 * n1));
}

double SpinorState::relative_phase() const { return std::arg(overlap_amplitude()); }

SplitStepGpe::SplitStepGpe(const Grid1& grid, double mass, double hbar, const Interactions& g)
    : grid_(grid), mass_(mass), hbar_(hbar), g_(g), k_(grid.n), buffer_(grid.n) {
  if (grid.n < 8 || grid.n % 2) throw ConfigError("SplitStepGpe: grid needs an even count >= 8");
  const double dk = units::two_pi / grid.length();
  for (int i = 0; i < grid.n; ++i) k_(i) = dk * (i < grid.n / 2 ? i : i - grid.n);
}

void SplitStepGpe::kinetic(Eigen::VectorXcd& psi, double dt) {
  if (dt != cached_dt_ || kinetic_phase_.size() != grid_.n) {
    kinetic_phase_.resize(grid_.n);
    for (int i = 0; i < grid_.n; ++i)
      kinetic_phase_(i) = std::exp(-I1 * (hbar_ * k_(i) * k_(i) / (2.0 * mass_) * dt));
    cached_dt_ = dt;
  }
  fft_.fwd(buffer_, psi);
  buffer_.array() *= kinetic_phase_.array();
  fft_.inv(psi, buffer_);
}

void SplitStepGpe::potential_half(SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt,
                                  const Drive& drive) {
  const double tau = dt / hbar_;
  const Complex c = 0.5 * hbar_ * drive.rabi * std::exp(-I1 * drive.phase);
  const double cabs = std::abs(c);
  for (int i = 0; i < grid_.n; ++i) {
    const double n0 = std::norm(s.psi0(i)), n1 = std::norm(s.psi1(i));
    const double a = V0(i) + g_.g00 * n0 + g_.g01 * n1;
    const double b = V1(i) + g_.g11 * n1 + g_.g01 * n0;
    if (cabs == 0.0) {
      s.psi0(i) *= std::exp(-I1 * (a * tau));
      s.psi1(i) *= std::exp(-I1 * (b * tau));
      continue;
    }
    const double m = 0.5 * (a + b), d = 0.5 * (a - b);
    const double w = std::sqrt(d * d + cabs * cabs);
    const double cw = std::cos(w * tau);
    const double sw = w * tau == 0.0 ? tau : std::sin(w * tau) / w;
    const Complex global = std::exp(-I1 * (m * tau));
    const Complex p0 = s.psi0(i), p1 = s.psi1(i);
    s.psi0(i) = global * ((cw - I1 * sw * d) * p0 - I1 * sw * c * p1);
    s.psi1(i) = global * (-I1 * sw * std::conj(c) * p0 + (cw + I1 * sw * d) * p1);
  }
}

void SplitStepGpe::step(SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt,
                        const Drive& drive) {
  potential_half(s, V0, V1, 0.5 * dt, drive);
  kinetic(s.psi0, dt);
  if (s.psi1.squaredNorm() > 0.0 || drive.rabi != 0.0) kinetic(s.psi1, dt);
  potential_half(s, V0, V1, 0.5 * dt, drive);
  s.t += dt;
}

void SplitStepGpe::imaginary_step(Eigen::VectorXcd& psi, const Eigen::VectorXd& V, double g, double dtau) {
  const double norm2 = psi.squaredNorm();
  const double tau = 0.5 * dtau / hbar_;
  for (int i = 0; i < grid_.n; ++i) psi(i) *= std::exp(-(V(i) + g * std::norm(psi(i))) * tau);
  fft_.fwd(buffer_, psi);
  for (int i = 0; i < grid_.n; ++i) buffer_(i) *= std::exp(-hbar_ * k_(i) * k_(i) / (2.0 * mass_) * dtau);
  fft_.inv(psi, buffer_);
  for (int i = 0; i < grid_.n; ++i) psi(i) *= std::exp(-(V(i) + g * std::norm(psi(i))) * tau);
  const double now = psi.squaredNorm();
  if (!(now > 0.0) || !std::isfinite(now)) throw NumericalError("imaginary-time step underflow");
  psi *= std::sqrt(norm2 / now);
}

Eigen::VectorXcd SplitStepGpe::to_momentum(const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd out(grid_.n);
  fft_.fwd(out, psi);
  return out;
}

double SplitStepGpe::energy(const Eigen::VectorXcd& psi, const Eigen::VectorXd& V, double g) {
  const Eigen::VectorXcd pk = to_momentum(psi);
  double kin = 0.0;
  for (int i = 0; i < grid_.n; ++i) kin += hbar_ * hbar_ * k_(i) * k_(i) / (2.0 * mass_) * std::norm(pk(i));
  kin *= grid_.dx / grid_.n;
  double pot = 0.0;
  for (int i = 0; i < grid_.n; ++i) {
    const double d = std::norm(psi(i));
    pot += (V(i) + 0.5 * g * d) * d;
  }
  return kin + pot * grid_.dx;
}

double SplitStepGpe::energy(const SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1) {
  double e = energy(s.psi0, V0, g_.g00) + energy(s.psi1, V1, g_.g11);
  double cross = 0.0;
  for (int i = 0; i < grid_.n; ++i) cross += std::norm(s.psi0(i)) * std::norm(s.psi1(i));
  return e + g_.g01 * cross * grid_.dx;
}

double SplitStepGpe::max_phase_advance(const SpinorState& s, const Eigen::VectorXd& V0, const Eigen::VectorXd& V1,
                                       double dt) {
  constexpr double threshold = 1e-10;
  double out = 0.0;
  const Eigen::ArrayXd n0 = s.psi0.cwiseAbs2().array(), n1 = s.psi1.cwiseAbs2().array();
  const double peak = (n0 + n1).maxCoeff();
  for (int i = 0; i < grid_.n; ++i) {
    if (n0(i) + n1(i) <= threshold * peak) continue;
    const double a = V0(i) + g_.g00 * n0(i) + g_.g01 * n1(i);
    const double b = V1(i) + g_.g11 * n1(i) + g_.g01 * n0(i);
    out = std::max(out, std::max(std::abs(a), std::abs(b)) * dt / hbar_);
  }
  const Eigen::ArrayXd m = to_momentum(s.psi0).cwiseAbs2().array() + to_momentum(s.psi1).cwiseAbs2().array();
  const double mpeak = m.maxCoeff();
  for (int i = 0; i < grid_.n; ++i)
    if (m(i) > threshold * mpeak) out = std::max(out, hbar_ * k_(i) * k_(i) / (2.0 * mass_) * dt);
  return out;
}

Eigen::VectorXcd ground_state(SplitStepGpe& solver, const Eigen::VectorXd& V, double N, double g, double dtau,
                              GroundStateReport* report, double tolerance, int max_steps) {
  const Grid1& grid = solver.grid();
  if (V.size() != grid.n) throw NumericalError("ground_state: potential size does not match the grid");
  if (!(N > 0.0)) throw NumericalError("ground_state: N must be > 0");

  Eigen::Index imin;
  V.minCoeff(&imin);
  const int i0 = static_cast<int>(imin);
  const int k = std::min({5, i0, grid.n - 1 - i0});
  double sigma = 1e-6;
  if (k > 0) {
    const double curv = (V(i0 + k) - 2.0 * V(i0) + V(i0 - k)) / (k * k * grid.dx * grid.dx);
    if (curv > 0.0) sigma = std::sqrt(solver.hbar() / std::sqrt(curv * solver.mass()));
  }
  sigma = std::max(sigma, 3.0 * grid.dx);

  Eigen::VectorXcd psi(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double u = (grid.x(i) - grid.x(i0)) / sigma;
    psi(i) = std::exp(-0.5 * u * u);
  }
  psi *= std::sqrt(N / (psi.squaredNorm() * grid.dx));

  GroundStateReport rep;
  double e_prev = solver.energy(psi, V, g);
  rep.energies.push_back(e_prev);
  bool converged = false;
  for (rep.steps = 1; rep.steps <= max_steps; ++rep.steps) {
    solver.imaginary_step(psi, V, g, dtau);
    const double e = solver.energy(psi, V, g);
    rep.energies.push_back(e);
    if (e > e_prev + 1e-12 * std::abs(e_prev)) rep.monotone = false;
    if (std::abs(e - e_prev) < tolerance * std::abs(e)) {
      converged = true;
      e_prev = e;
      break;
    }
    e_prev = e;
  }
  if (!converged) throw NumericalError("ground_state: imaginary-time propagation did not converge");
  rep.energy = e_prev;

  const Eigen::ArrayXd dens = psi.cwiseAbs2().array();
  const double peak = dens.maxCoeff();
  const int edge = std::max(1, grid.n / 50);
  for (int i = 0; i < edge; ++i)
    if (dens(i) > 1e-8 * peak || dens(grid.n - 1 - i) > 1e-8 * peak)
      throw NumericalError("ground_state: non-confining potential (density reaches the grid edge)");
  if (report) *report = std::move(rep);
  return psi;
}

void apply_pulse(SpinorState& s, double area, double phase) {
  if (!(area >= -1e-12 && area <= 2.0 * pi + 1e-12)) throw NumericalError("apply_pulse: area outside [0, 2 pi]");
  const double c = std::cos(0.5 * area), sn = std::sin(0.5 * area);
  const Complex u01 = -I1 * std::exp(-I1 * phase) * sn;
  const Complex u10 = -I1 * std::exp(I1 * phase) * sn;
  const Eigen::VectorXcd p0 = s.psi0;
  s.psi0 = c * p0 + u01 * s.psi1;
  s.psi1 = u10 * p0 + c * s.psi1;
}

void apply_pulse_finite(SpinorState& s, double area, double phase, double duration, SplitStepGpe& solver,
                        const Eigen::VectorXd& V0, const Eigen::VectorXd& V1, double dt) {
  if (!(area >= 0.0 && area <= 2.0 * pi + 1e-12)) throw NumericalError("apply_pulse: area outside [0, 2 pi]");
  if (!(duration > 0.0) || !(dt > 0.0)) throw NumericalError("apply_pulse_finite: duration and dt must be > 0");
  const int n = std::max(1, static_cast<int>(std::lround(duration / dt)));
  const double h = duration / n;
  const Drive drive{area / duration, phase};
  for (int i = 0; i < n; ++i) solver.step(s, V0, V1, h, drive);
}

// ------------------------------------------------------------ sequences

void SequenceSchedule::validate() const {
  for (const auto& e : events) {
    if (const auto* p = std::get_if<PulseEvent>(&e)) {
      if (!(p->area >= 0.0 && p->area <= 2.0 * pi + 1e-12)) throw ConfigError("schedule: pulse area outside [0, 2 pi]");
      if (!(p->duration >= 0.0)) throw ConfigError("schedule: pulse duration must be >= 0");
    } else if (const auto* m = std::get_if<MicrowaveEvent>(&e)) {
      if (!(m->ramp_time >= 0.0)) throw ConfigError("schedule: ramp time must be >= 0");
    } else if (const auto* h = std::get_if<HoldEvent>(&e)) {
      if (!(h->duration >= 0.0) || !(h->probe_every >= 0.0)) throw ConfigError("schedule: hold times must be >= 0");
    }
  }
}

double lo_detuning(const ExperimentConfig& cfg) {
  if (cfg.ramsey.lo_detuning) return *cfg.ramsey.lo_detuning;
  const double fringe = units::two_pi * cfg.ramsey.fringe_frequency;
  if (!cfg.microwave_on()) return fringe;
  const PotentialModel model(cfg);
  const Vec3& r = model.config().trap.r_min;
  const double dV = model.potential(state_1, r) - model.potential(state_0, r);
  return fringe - dV / cfg.constants.hbar;
}

SequenceSchedule ramsey_schedule(const ExperimentConfig& cfg, double T_R, double lo, bool finite_pulses) {
  if (!(T_R >= 0.0)) throw ConfigError("ramsey: T_R must be >= 0");
  const double d = finite_pulses ? cfg.ramsey.pi2_duration : 0.0;
  SequenceSchedule s;
  s.events.push_back(PulseEvent{0.5 * pi, 0.0, d});
  if (cfg.microwave_on()) s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
  s.events.push_back(HoldEvent{T_R, 0.0, 0.0});
  if (cfg.microwave_on()) s.events.push_back(MicrowaveEvent{false, 0.0});
  s.events.push_back(PulseEvent{0.5 * pi, lo * T_R, d});
  s.events.push_back(MeasureEvent{});
  return s;
}

namespace {

struct Runner {
  const ExperimentConfig& cfg;
  const AxialPotentials& pot;
  const SequenceOptions& opt;
  SplitStepGpe solver;
  Eigen::VectorXd V0off, dV0, V1off, dV1, V0, V1;
  SequenceResult out;
  SpinorState& s;

  // Microwave amplitude a(t) = a_from + (a_to - a_from) * ramp progress.
  double a_from = 0.0, a_to = 0.0, ramp_start = 0.0, ramp_time = 0.0;
  double next_record = 0.0;
  double first_pulse_end = -1.0;
  double pre_overlap = 1.0, pre_phase = 0.0;
  long steps = 0;

  Runner(const ExperimentConfig& c, const AxialPotentials& p, const SequenceOptions& o, const Grid1& grid,
         const Interactions& g)
      : cfg(c), pot(p), opt(o), solver(grid, c.constants.mass, c.constants.hbar, g), s(out.final_state) {
    V0off.resize(grid.n), dV0.resize(grid.n), V1off.resize(grid.n), dV1.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.x(i);
      V0off(i) = pot.value(0, x, 0.0);
      dV0(i) = pot.value(0, x, 1.0) - V0off(i);
      V1off(i) = pot.value(1, x, 0.0);
      dV1(i) = opt.static_state1 ? 0.0 : pot.value(1, x, 1.0) - V1off(i);
    }
  }

  double amplitude(double t) const {
    if (ramp_time <= 0.0 || t >= ramp_start + ramp_time) return a_to;
    if (t <= ramp_start) return a_from;
    return a_from + (a_to - a_from) * (t - ramp_start) / ramp_time;
  }

  void set_potentials(double t) {
    const double a = amplitude(t);
    V0 = V0off + a * a * dV0;
    V1 = V1off + a * a * dV1;
  }

  void record() {
    out.trace.push_back({s.t, s.centroid0(), s.N1() > 0.0 ? s.centroid1() : std::numeric_limits<double>::quiet_NaN(),
                         s.N0(), s.N1(), s.overlap()});
    next_record += opt.record_every;
  }

  void check_phase_advance() {
    const double adv = solver.max_phase_advance(s, V0, V1, cfg.dynamics.dt);
    if (adv > 0.1)
      throw NumericalError("evolve: time step too large (phase advance " + std::to_string(adv) +
                           " rad per step > 0.1)");
  }

  void advance(double dt, const Drive& drive = {}) {
    set_potentials(s.t + 0.5 * dt);
    if (steps % 1000 == 0) check_phase_advance();
    solver.step(s, V0, V1, dt, drive);
    ++steps;
    if (s.t >= next_record - 1e-9 * opt.record_every) record();
  }

  void pulse(const PulseEvent& p) {
    pre_overlap = s.overlap();
    pre_phase = s.relative_phase();
    if (p.duration == 0.0) {
      apply_pulse(s, p.area, p.phase);
    } else {
      const int n = std::max(1, static_cast<int>(std::lround(p.duration / cfg.dynamics.dt)));
      const Drive drive{p.area / p.duration, p.phase};
      for (int i = 0; i < n; ++i) advance(p.duration / n, drive);
    }
    if (first_pulse_end < 0.0) first_pulse_end = s.t;
  }

  void probe(double T, double phase) {
    SpinorState copy = s;
    apply_pulse(copy, 0.5 * pi, phase);
    RamseyResult r;
    r.T_R = T;
    r.N0 = copy.N0();
    r.N1 = copy.N1();
    r.overlap = s.overlap();
    r.phase = s.relative_phase();
    out.measurements.push_back(r);
  }

  void hold(const HoldEvent& h) {
    const double dt = cfg.dynamics.dt;
    const long n = std::lround(h.duration / dt);
    const double t0 = s.t;
    const long every = h.probe_every > 0.0 ? std::max(1L, std::lround(h.probe_every / dt)) : 0;
    if (every) probe(0.0, 0.0);
    for (long i = 1; i <= n; ++i) {
      advance(dt);
      if (every && i % every == 0) probe(s.t - t0, h.probe_phase_rate * (s.t - t0));
    }
  }

  void run(const SequenceSchedule& schedule) {
    record();
    for (const auto& e : schedule.events) {
      if (const auto* p = std::get_if<PulseEvent>(&e)) {
        pulse(*p);
      } else if (const auto* m = std::get_if<MicrowaveEvent>(&e)) {
        a_from = amplitude(s.t);
        a_to = m->on ? 1.0 : 0.0;
        ramp_start = s.t;
        ramp_time = m->ramp_time;
      } else if (const auto* h = std::get_if<HoldEvent>(&e)) {
        hold(*h);
      } else {
        RamseyResult r;
        r.T_R = first_pulse_end < 0.0 ? s.t : s.t - first_pulse_end;
        r.N0 = s.N0();
        r.N1 = s.N1();
        r.overlap = pre_overlap;
        r.phase = pre_phase;
        out.measurements.push_back(r);
      }
    }
  }
};

}  // namespace

SequenceResult run_sequence(const ExperimentConfig& cfg, const SequenceSchedule& schedule,
                            const SequenceOptions& options) {
  return run_sequence(cfg, make_axial_potentials(cfg), schedule, options);
}

SequenceResult run_sequence(const ExperimentConfig& cfg, const AxialPotentials& potentials,
                            const SequenceSchedule& schedule, const SequenceOptions& options) {
  schedule.validate();
  if (!(options.record_every > 0.0)) throw ConfigError("sequence: record interval must be > 0");
  const auto& d = cfg.dynamics;
  const Grid1 grid = make_grid(d.x_min, d.x_max, d.dx);
  const Interactions g =
      options.interactions ? interactions_1d(cfg.constants, cfg.trap.f_radial) : Interactions{};

  Runner run(cfg, potentials, options, grid, g);
  run.s.grid = grid;
  run.s.psi0 = ground_state(run.solver, run.V0off, d.atom_number, g.g00, d.imag_dt, &run.out.ground);
  run.s.psi1 = Eigen::VectorXcd::Zero(grid.n);
  run.s.t = 0.0;
  run.set_potentials(0.0);
  run.run(schedule);
  return std::move(run.out);
}

RamseyResult ramsey_run(const ExperimentConfig& cfg, double T_R, const SequenceOptions& options) {
  const auto res = run_sequence(cfg, ramsey_schedule(cfg, T_R, lo_detuning(cfg)), options);
  return res.measurements.back();
}

SequenceResult ramsey_scan(const ExperimentConfig& cfg, const SequenceOptions& options) {
  const auto& r = cfg.ramsey;
  SequenceSchedule s;
  s.events.push_back(PulseEvent{0.5 * pi, 0.0, 0.0});
  if (cfg.microwave_on()) s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
  s.events.push_back(HoldEvent{r.TR_max, r.TR_step, lo_detuning(cfg)});
  auto res = run_sequence(cfg, s, options);
  const auto measure = contrast_measure(res.measurements, r.window);
  for (std::size_t i = 0; i < measure.size(); ++i) res.measurements[i].contrast = measure[i];
  return res;
}

std::vector<double> contrast_measure(const std::vector<RamseyResult>& results, double window) {
  const std::size_t n = results.size();
  std::vector<double> out(n);
  const double half = 0.5 * window * (1.0 + 1e-9);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double T = results[i].T_R;
    while (lo < n && results[lo].T_R < T - half) ++lo;
    if (hi < lo) hi = lo;
    while (hi < n && results[hi].T_R <= T + half) ++hi;
    const std::size_t count = hi - lo;
    if (count < 4)
      throw NumericalError("contrast_measure: window underpopulated (" + std::to_string(count) + " samples)");
    double mean = 0.0;
    for (std::size_t j = lo; j < hi; ++j) mean += results[j].N1;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t j = lo; j < hi; ++j) var += (results[j].N1 - mean) * (results[j].N1 - mean);
    var /= static_cast<double>(count);
    out[i] = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  }
  return out;
}

RecurrenceReport find_recurrence(const std::vector<RamseyResult>& results, const std::vector<double>& measure,
                                 double t_min) {
  if (results.size() != measure.size()) throw NumericalError("find_recurrence: size mismatch");
  RecurrenceReport r;
  bool found = false;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].T_R >= t_min && (!found || measure[i] > r.peak)) {
      r.peak = measure[i];
      r.T_peak = results[i].T_R;
      found = true;
    }
  if (!found) throw NumericalError("find_recurrence: no samples beyond t_min");
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].T_R >= 0.4 * r.T_peak && results[i].T_R <= 0.6 * r.T_peak) {
      sum += measure[i];
      ++count;
    }
  r.floor = count ? sum / count : 0.0;
  r.ratio = r.floor > 0.0 ? r.peak / r.floor : std::numeric_limits<double>::infinity();
  return r;
}

// ------------------------------------------------------------ classical

ClassicalTrajectory com_trajectory(const AxialPotentials& p, double mass, double T, double dt,
                                   std::optional<double> start) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw NumericalError("com_trajectory: need T >= 0 and dt > 0");
  const double x_start = start ? *start : p.V0_off.argmin();
  const long n = std::lround(T / dt);
  ClassicalTrajectory out;
  out.t.reserve(static_cast<std::size_t>(n + 1));
  out.x0.reserve(static_cast<std::size_t>(n + 1));
  out.x1.reserve(static_cast<std::size_t>(n + 1));
  std::array<double, 2> x{x_start, x_start}, v{0.0, 0.0}, a;
  auto accel = [&](int j, double xx, double t) { return -p.slope(j, xx, p.amplitude(t)) / mass; };
  for (int j = 0; j < 2; ++j) a[static_cast<std::size_t>(j)] = accel(j, x[static_cast<std::size_t>(j)], 0.0);
  out.t.push_back(0.0);
  out.x0.push_back(x[0]);
  out.x1.push_back(x[1]);
  for (long i = 1; i <= n; ++i) {
    const double t = i * dt;
    for (std::size_t j = 0; j < 2; ++j) {
      v[j] += 0.5 * dt * a[j];
      x[j] += dt * v[j];
      a[j] = accel(static_cast<int>(j), x[j], t);
      v[j] += 0.5 * dt * a[j];
    }
    out.t.push_back(t);
    out.x0.push_back(x[0]);
    out.x1.push_back(x[1]);
  }
  return out;
}

ClassicalTrajectory com_trajectory(const ExperimentConfig& cfg, double T, double dt) {
  return com_trajectory(make_axial_potentials(cfg), cfg.constants.mass, T, dt > 0.0 ? dt : cfg.dynamics.dt);
}

namespace {

struct LinearFit {
  double c, a, b, rss;
};

LinearFit fit_at(const std::vector<double>& t, const std::vector<double>& x, double w) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Eigen::Vector3d phi(1.0, std::cos(w * t[i]), std::sin(w * t[i]));
    A += phi * phi.transpose();
    rhs += phi * x[i];
  }
  const Eigen::Vector3d p = A.ldlt().solve(rhs);
  double rss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = x[i] - (p(0) + p(1) * std::cos(w * t[i]) + p(2) * std::sin(w * t[i]));
    rss += r * r;
  }
  return {p(0), p(1), p(2), rss};
}

}  // namespace

SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& x, double frequency_guess) {
  if (t.size() != x.size() || t.size() < 8) throw NumericalError("fit_sinusoid: need >= 8 matching samples");
  if (!(frequency_guess > 0.0)) throw NumericalError("fit_sinusoid: frequency guess must be > 0");
  const double w0 = units::two_pi * frequency_guess;
  constexpr int n_scan = 400;
  double best_w = w0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    const double w = w0 * (0.6 + 0.8 * i / n_scan);
    const double r = fit_at(t, x, w).rss;
    if (r < best) best = r, best_w = w;
  }
  double a = best_w - 0.8 * w0 / n_scan, b = best_w + 0.8 * w0 / n_scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = fit_at(t, x, c).rss, fd = fit_at(t, x, d).rss;
  for (int k = 0; k < 200 && b - a > 1e-12 * w0; ++k) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = fit_at(t, x, c).rss;
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = fit_at(t, x, d).rss;
    }
  }
  const double w = 0.5 * (a + b);
  const LinearFit f = fit_at(t, x, w);
  SinusoidFit out;
  out.frequency = w / units::two_pi;
  out.amplitude = std::hypot(f.a, f.b);
  out.offset = f.c;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  out.peak_to_peak = *mx - *mn;
  out.rms_residual = std::sqrt(f.rss / static_cast<double>(t.size()));
  return out;
}

// ------------------------------------------------------------ adiabaticity

std::string to_string(MotionalRegime r) {
  switch (r) {
    case MotionalRegime::sudden: return "sudden";
    case MotionalRegime::adiabatic: return "adiabatic";
    default: return "intermediate";
  }
}

RampReport check_ramp(const ExperimentConfig& cfg, double ramp_time) {
  if (!(ramp_time >= 0.0)) throw ConfigError("ramp time must be >= 0");
  if (!cfg.microwave_on()) throw ConfigError("adiabaticity check needs the microwave enabled with P > 0");
  const PotentialModel model(cfg);
  const Vec3& r = model.config().trap.r_min;
  const RwaHamiltonian H = model.hamiltonian(r);
  const double omega = std::abs(H.rabi_at(-1, -1));
  const double delta = std::abs(H.detuning_at(-1, -1));

  RampReport rep;
  rep.ramp_time = ramp_time;
  // Linear amplitude ramp at fixed detuning: the smallest gap is |Delta|.
  const double rate = ramp_time > 0.0 ? omega / ramp_time : std::numeric_limits<double>::infinity();
  rep.internal_ratio = rate / (delta * delta);
  rep.internal_adiabatic = rep.internal_ratio <= 0.1;

  const SplitResult split = splitting(model.config(), cfg.microwave.power, cfg.microwave.detuning);
  const TrapReport trap = trap_frequencies([&](const Vec3& x) { return model.potential(state_0, x); }, split.min0,
                                           cfg.constants.mass);
  rep.trap_period = 1.0 / trap.frequencies(0);
  if (ramp_time < 0.1 * rep.trap_period)
    rep.motional = MotionalRegime::sudden;
  else if (ramp_time > 10.0 * rep.trap_period)
    rep.motional = MotionalRegime::adiabatic;
  else
    rep.motional = MotionalRegime::intermediate;
  return rep;
}

std::vector<RampReport> check_adiabaticity(const ExperimentConfig& cfg, const SequenceSchedule& schedule) {
  schedule.validate();
  std::vector<RampReport> out;
  for (const auto& e : schedule.events)
    if (const auto* m = std::get_if<MicrowaveEvent>(&e); m && m->on) out.push_back(check_ramp(cfg, m->ramp_time));
  return out;
}

}  // namespace chipdress
