#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chipdress/dynamics.hpp"
#include "chipdress/error.hpp"
#include "chipdress/units.hpp"

using namespace chipdress;
namespace u = chipdress::units;

namespace {

constexpr double pi = std::numbers::pi;
const PhysicalConstants c;

Eigen::VectorXd harmonic(const Grid1& g, double f, double centre = 0.0) {
  const double w = u::two_pi * f;
  Eigen::VectorXd V(g.n);
  for (int i = 0; i < g.n; ++i) V(i) = 0.5 * c.mass * w * w * (g.x(i) - centre) * (g.x(i) - centre);
  return V;
}

Eigen::VectorXcd gaussian(const Grid1& g, double sigma, double centre, double N) {
  Eigen::VectorXcd psi(g.n);
  for (int i = 0; i < g.n; ++i) psi(i) = std::exp(-0.5 * std::pow((g.x(i) - centre) / sigma, 2));
  psi *= std::sqrt(N / (psi.squaredNorm() * g.dx));
  return psi;
}

SpinorState spinor(const Grid1& g, Eigen::VectorXcd psi0) {
  SpinorState s;
  s.grid = g;
  s.psi0 = std::move(psi0);
  s.psi1 = Eigen::VectorXcd::Zero(g.n);
  return s;
}

// Harmonic profiles on [-L, L]: V0 shifted by d when the microwave is on.
AxialPotentials synthetic(double d, double L = 30e-6) {
  const double w = u::two_pi * 116.0, h = 0.1e-6;
  const int n = static_cast<int>(std::lround(2 * L / h)) + 1;
  std::vector<double> centred(n), shifted(n);
  for (int i = 0; i < n; ++i) {
    const double x = -L + i * h;
    centred[static_cast<std::size_t>(i)] = 0.5 * c.mass * w * w * x * x;
    shifted[static_cast<std::size_t>(i)] = 0.5 * c.mass * w * w * (x - d) * (x - d);
  }
  AxialPotentials p;
  p.V0_off = p.V1_off = p.V1_on = Profile(-L, h, centred);
  p.V0_on = Profile(-L, h, shifted);
  return p;
}

ExperimentConfig symmetric_cfg() {
  ExperimentConfig cfg = default_config();
  cfg.dynamics.x_min = -30e-6;
  cfg.dynamics.x_max = 30e-6;
  cfg.dynamics.switch_time = 0.0;
  return cfg;
}

std::vector<RamseyResult> fringe(double C, double step, double T_max, double f = 1.0 / 150e-6) {
  std::vector<RamseyResult> out;
  for (double T = 0.0; T <= T_max + 1e-12; T += step) {
    RamseyResult r;
    r.T_R = T;
    r.N1 = 200.0 * (1.0 + C * std::cos(u::two_pi * f * T));
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("unit") {
  TEST_CASE("grid: even point count covering the range") {
    const Grid1 g = make_grid(-42e-6, 18e-6, 0.05e-6);
    CHECK(g.n % 2 == 0);
    CHECK(g.n * g.dx >= 60e-6 - 1e-15);
    CHECK_THROWS_AS(make_grid(1.0, 0.0, 0.1), ConfigError);
  }

  TEST_CASE("profile interpolation is exact for cubics and rejects points outside") {
    std::vector<double> v;
    for (int i = 0; i < 21; ++i) {
      const double x = i * 0.1;
      v.push_back(x * x * x - 2 * x);
    }
    const Profile p(0.0, 0.1, v);
    CHECK(p(0.437) == doctest::Approx(std::pow(0.437, 3) - 2 * 0.437).epsilon(1e-12));
    CHECK(p.derivative(0.437) == doctest::Approx(3 * 0.437 * 0.437 - 2).epsilon(1e-10));
    CHECK(p.argmin() == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-8));
    CHECK_THROWS_AS(p(2.2), NumericalError);
  }

  TEST_CASE("harmonic ground state at g = 0: width sqrt(hbar/m w) and energy hbar w / 2") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.05e-6);
    SplitStepGpe solver(g, c.mass, c.hbar, {});
    const double f = 109.0, w = u::two_pi * f;
    GroundStateReport rep;
    const Eigen::VectorXcd psi = ground_state(solver, harmonic(g, f), 1.0, 0.0, 5e-6, &rep);
    CHECK(rep.energy == doctest::Approx(0.5 * c.hbar * w).epsilon(1e-4));
    double x2 = 0.0;
    for (int i = 0; i < g.n; ++i) x2 += std::norm(psi(i)) * g.x(i) * g.x(i) * g.dx;
    CHECK(std::sqrt(2 * x2) == doctest::Approx(std::sqrt(c.hbar / (c.mass * w))).epsilon(1e-4));
    CHECK(rep.monotone);
  }

  TEST_CASE("N = 400 ground state half-width is about s/3.9 = 2.4 um") {
    ExperimentConfig cfg = default_config();
    const AxialPotentials p = make_axial_potentials(cfg);
    const Grid1 g = make_grid(cfg.dynamics.x_min, cfg.dynamics.x_max, cfg.dynamics.dx);
    const Interactions gi = interactions_1d(c, cfg.trap.f_radial);
    SplitStepGpe solver(g, c.mass, c.hbar, gi);
    Eigen::VectorXd V(g.n);
    for (int i = 0; i < g.n; ++i) V(i) = p.value(0, g.x(i), 0.0);
    const Eigen::VectorXcd psi = ground_state(solver, V, 400, gi.g00, cfg.dynamics.imag_dt);
    const Eigen::ArrayXd d = psi.cwiseAbs2().array();
    Eigen::Index imax;
    const double peak = d.maxCoeff(&imax);
    int lo = static_cast<int>(imax), hi = static_cast<int>(imax);
    while (d(lo) > 0.5 * peak) --lo;
    while (d(hi) > 0.5 * peak) ++hi;
    const double hwhm = 0.5 * (hi - lo) * g.dx;
    CHECK(hwhm == doctest::Approx(2.4e-6).epsilon(0.3));
  }

  TEST_CASE("non-confining potentials are detected") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.1e-6);
    SplitStepGpe solver(g, c.mass, c.hbar, {});
    Eigen::VectorXd V(g.n);
    for (int i = 0; i < g.n; ++i) V(i) = 1e-30 * (g.x(i) / 20e-6);
    CHECK_THROWS_AS(ground_state(solver, V, 1.0, 0.0, 5e-6, nullptr, 1e-10, 20000), NumericalError);
  }

  TEST_CASE("pulses: beam splitter, composition to pi, area bounds") {
    const Grid1 g = make_grid(-10e-6, 10e-6, 0.1e-6);
    SpinorState s = spinor(g, gaussian(g, 1e-6, 0.0, 400.0));
    apply_pulse(s, 0.5 * pi, 0.0);
    CHECK(s.N0() == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(s.N1() == doctest::Approx(200.0).epsilon(1e-12));
    apply_pulse(s, 0.5 * pi, 0.0);
    CHECK(s.N0() < 1e-9);
    CHECK_THROWS_AS(apply_pulse(s, 7.0, 0.0), NumericalError);
  }

  TEST_CASE("zero-delay Ramsey populations follow cos^2(phi/2)") {
    const Grid1 g = make_grid(-10e-6, 10e-6, 0.1e-6);
    for (double phi : {0.0, 0.7, pi / 2, 2.0, pi}) {
      SpinorState s = spinor(g, gaussian(g, 1e-6, 0.0, 1.0));
      apply_pulse(s, 0.5 * pi, 0.0);
      apply_pulse(s, 0.5 * pi, phi);
      CHECK(s.N1() == doctest::Approx(std::pow(std::cos(0.5 * phi), 2)).epsilon(1e-12));
    }
  }

  TEST_CASE("finite 170 us pi/2 pulse matches the instantaneous pulse within 1%") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.05e-6);
    const Interactions gi = interactions_1d(c, 500.0);
    SplitStepGpe solver(g, c.mass, c.hbar, gi);
    const Eigen::VectorXd V = harmonic(g, 109.0);
    SpinorState a = spinor(g, ground_state(solver, V, 400, gi.g00, 5e-6));
    SpinorState b = a;
    apply_pulse(a, 0.5 * pi, 0.0);
    apply_pulse_finite(b, 0.5 * pi, 0.0, 170e-6, solver, V, V, 1e-6);
    CHECK(std::abs(a.N1() - b.N1()) < 0.01 * 400);
  }

  TEST_CASE("contrast measure: constant signal gives 0, underpopulated window throws") {
    auto flat = fringe(0.0, 10e-6, 1e-3);
    for (double m : contrast_measure(flat, 150e-6)) CHECK(m == doctest::Approx(0.0));
    CHECK_THROWS_AS(contrast_measure(fringe(0.5, 100e-6, 1e-3), 150e-6), NumericalError);
  }

  TEST_CASE("find_recurrence picks the late peak and compares it with the mid floor") {
    std::vector<RamseyResult> r(101);
    std::vector<double> m(101);
    for (int i = 0; i <= 100; ++i) {
      r[static_cast<std::size_t>(i)].T_R = i * 0.1e-3;
      m[static_cast<std::size_t>(i)] = 0.01 + std::exp(-std::pow((i * 0.1 - 8.6) / 0.3, 2));
    }
    const RecurrenceReport rep = find_recurrence(r, m);
    CHECK(rep.T_peak == doctest::Approx(8.6e-3));
    CHECK(rep.ratio > 50);
  }

  TEST_CASE("sinusoid fit recovers frequency, amplitude and offset") {
    std::vector<double> t, x;
    for (int i = 0; i < 2000; ++i) {
      t.push_back(i * 5e-6);
      x.push_back(-16e-6 + 4.2e-6 * std::cos(u::two_pi * 116.3 * t.back() + 0.4));
    }
    const SinusoidFit f = fit_sinusoid(t, x, 110.0);
    CHECK(f.frequency == doctest::Approx(116.3).epsilon(1e-7));
    CHECK(f.amplitude == doctest::Approx(4.2e-6).epsilon(1e-6));
    CHECK(f.offset == doctest::Approx(-16e-6).epsilon(1e-6));
  }

  TEST_CASE("adiabaticity: slow split ramp, fast switch and instantaneous switch") {
    ExperimentConfig slow = default_config();
    slow.microwave.detuning = u::angular_from_kHz(150);
    const RampReport a = check_ramp(slow, 0.150);
    CHECK(a.internal_adiabatic);
    CHECK(a.motional == MotionalRegime::adiabatic);

    const RampReport b = check_ramp(default_config(), 50e-6);
    CHECK(b.internal_adiabatic);
    CHECK(b.motional == MotionalRegime::sudden);

    const RampReport z = check_ramp(default_config(), 0.0);
    CHECK_FALSE(z.internal_adiabatic);

    const auto reps = check_adiabaticity(default_config(), ramsey_schedule(default_config(), 1e-3, 0.0));
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].ramp_time == doctest::Approx(50e-6));
  }

  TEST_CASE("too large a time step violates the phase-advance bound") {
    ExperimentConfig cfg = default_config();
    cfg.dynamics.dt = 50e-6;
    SequenceSchedule s;
    s.events.push_back(MicrowaveEvent{true, 0.0});
    s.events.push_back(HoldEvent{1e-3, 0.0, 0.0});
    CHECK_THROWS_AS(run_sequence(cfg, s), NumericalError);
  }

  TEST_CASE("static |1bar> control: psi1 stays at rest to < 0.01 um with g01 = 0") {
    ExperimentConfig cfg = default_config();
    cfg.constants.a01 = 0.0;
    SequenceSchedule s;
    s.events.push_back(PulseEvent{0.5 * pi, 0.0, 0.0});
    s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
    s.events.push_back(HoldEvent{10e-3, 0.0, 0.0});
    SequenceOptions o;
    o.static_state1 = true;
    const SequenceResult res = run_sequence(cfg, s, o);
    double lo = 1.0, hi = -1.0;
    for (const auto& p : res.trace) lo = std::min(lo, p.x1), hi = std::max(hi, p.x1);
    CHECK(hi - lo < 0.01e-6);
  }

  TEST_CASE("with g01 > 0 the |1bar> cloud is set into motion by the passing |0bar> cloud") {
    ExperimentConfig cfg = default_config();
    SequenceSchedule s;
    s.events.push_back(PulseEvent{0.5 * pi, 0.0, 0.0});
    s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
    s.events.push_back(HoldEvent{10e-3, 0.0, 0.0});
    SequenceOptions o;
    o.static_state1 = true;
    const SequenceResult res = run_sequence(cfg, s, o);
    double lo = 1.0, hi = -1.0;
    for (const auto& p : res.trace) lo = std::min(lo, p.x1), hi = std::max(hi, p.x1);
    CHECK(hi - lo > 0.1e-6);
  }
}

TEST_SUITE("property") {
  TEST_CASE("real-time propagation conserves the norm to 1e-10 (with coupling and interactions)") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.05e-6);
    const Interactions gi = interactions_1d(c, 500.0);
    SplitStepGpe solver(g, c.mass, c.hbar, gi);
    const Eigen::VectorXd V0 = harmonic(g, 116.0, -4e-6), V1 = harmonic(g, 109.0);
    SpinorState s = spinor(g, gaussian(g, 2e-6, 0.0, 400.0));
    apply_pulse(s, 0.5 * pi, 0.0);
    for (int i = 0; i < 3000; ++i) solver.step(s, V0, V1, 1e-6, i < 500 ? Drive{3000.0, 0.3} : Drive{});
    CHECK(std::abs(s.N() - 400.0) < 1e-10 * 400.0);
  }

  TEST_CASE("imaginary-time energy decreases monotonically") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.05e-6);
    const Interactions gi = interactions_1d(c, 500.0);
    SplitStepGpe solver(g, c.mass, c.hbar, gi);
    GroundStateReport rep;
    ground_state(solver, harmonic(g, 109.0), 400, gi.g00, 5e-6, &rep);
    CHECK(rep.monotone);
    CHECK(rep.energies.back() < rep.energies.front());
  }

  TEST_CASE("coherent state at g = 0: x(t) = A cos(wt), energy conserved to 1e-8") {
    const Grid1 g = make_grid(-25e-6, 25e-6, 0.05e-6);
    SplitStepGpe solver(g, c.mass, c.hbar, {});
    const double f = 109.0, w = u::two_pi * f, A = 4e-6;
    const Eigen::VectorXd V = harmonic(g, f);
    SpinorState s = spinor(g, gaussian(g, std::sqrt(c.hbar / (c.mass * w)), A, 1.0));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.n);
    const double E0 = solver.energy(s, V, zero);
    double worst = 0.0;
    for (int i = 1; i <= 9000; ++i) {
      solver.step(s, V, zero, 1e-6);
      if (i % 100 == 0) worst = std::max(worst, std::abs(s.centroid0() - A * std::cos(w * s.t)));
    }
    CHECK(worst < 1e-3 * A);
    CHECK(std::abs(solver.energy(s, V, zero) - E0) < 1e-8 * E0);
  }

  TEST_CASE("split-step error is second order in the time step") {
    const Grid1 g = make_grid(-20e-6, 20e-6, 0.1e-6);
    const Interactions gi = interactions_1d(c, 500.0);
    const Eigen::VectorXd V0 = harmonic(g, 116.0, -3e-6), V1 = harmonic(g, 109.0);
    auto run = [&](double dt) {
      SplitStepGpe solver(g, c.mass, c.hbar, gi);
      SpinorState s = spinor(g, gaussian(g, 1.5e-6, 0.0, 400.0));
      apply_pulse(s, 0.5 * pi, 0.0);
      const int n = static_cast<int>(std::lround(2e-3 / dt));
      for (int i = 0; i < n; ++i) solver.step(s, V0, V1, dt);
      return s;
    };
    const SpinorState ref = run(0.25e-6);
    auto err = [&](const SpinorState& s) { return (s.psi0 - ref.psi0).norm() + (s.psi1 - ref.psi1).norm(); };
    const double e1 = err(run(4e-6)), e2 = err(run(2e-6));
    CHECK(std::log2(e1 / e2) > 1.8);
  }

  TEST_CASE("profile interpolation converges at least third order") {
    auto sample = [](double h) {
      std::vector<double> v;
      const int n = static_cast<int>(std::lround(2.0 / h)) + 1;
      for (int i = 0; i < n; ++i) v.push_back(std::sin(3 * i * h));
      return Profile(0.0, h, v);
    };
    auto err = [](const Profile& p) {
      double e = 0.0;
      for (int i = 0; i < 997; ++i) {
        const double x = 0.3 + i * 0.0014;
        e = std::max(e, std::abs(p(x) - std::sin(3 * x)));
      }
      return e;
    };
    CHECK(std::log2(err(sample(0.1)) / err(sample(0.05))) > 3.0);
  }

  TEST_CASE("classical and mean-field centroids agree at g = 0 over one period") {
    ExperimentConfig cfg = default_config();
    const AxialPotentials p = make_axial_potentials(cfg);
    SequenceSchedule s;
    s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
    s.events.push_back(HoldEvent{8.6e-3, 0.0, 0.0});
    SequenceOptions o;
    o.interactions = false;
    const SequenceResult q = run_sequence(cfg, p, s, o);
    const ClassicalTrajectory tr = com_trajectory(p, c.mass, 8.6e-3, cfg.dynamics.dt);
    double worst = 0.0;
    for (const auto& pt : q.trace) {
      const std::size_t k = static_cast<std::size_t>(std::lround(pt.t / cfg.dynamics.dt));
      worst = std::max(worst, std::abs(pt.x0 - tr.x0[k]));
    }
    CHECK(worst < 0.05 * 8.5e-6);
  }

  TEST_CASE("mirroring the displacement mirrors the trajectories") {
    const ExperimentConfig cfg = symmetric_cfg();
    const AxialPotentials plus = synthetic(4.3e-6), minus = synthetic(-4.3e-6);
    const ClassicalTrajectory a = com_trajectory(plus, c.mass, 10e-3, 1e-6, 0.0);
    const ClassicalTrajectory b = com_trajectory(minus, c.mass, 10e-3, 1e-6, 0.0);
    for (std::size_t i = 0; i < a.t.size(); i += 97) CHECK(std::abs(a.x0[i] + b.x0[i]) < 1e-9 * 4.3e-6);
    for (double x : a.x1) CHECK(std::abs(x) < 1e-15);

    SequenceSchedule s;
    s.events.push_back(PulseEvent{0.5 * pi, 0.0, 0.0});
    s.events.push_back(MicrowaveEvent{true, 0.0});
    s.events.push_back(HoldEvent{3e-3, 0.0, 0.0});
    const SequenceResult qa = run_sequence(cfg, plus, s), qb = run_sequence(cfg, minus, s);
    for (std::size_t i = 0; i < qa.trace.size(); i += 13) {
      CHECK(std::abs(qa.trace[i].x0 + qb.trace[i].x0) < 1e-6 * 4.3e-6);
      if (qa.trace[i].N1 > 0.0) CHECK(std::abs(qa.trace[i].x1 + qb.trace[i].x1) < 1e-6 * 4.3e-6);
    }
  }

  TEST_CASE("microwave off, no interactions: overlap stays 1 for all T_R") {
    ExperimentConfig cfg = default_config();
    cfg.microwave.enabled = false;
    cfg.ramsey.TR_max = 2e-3;
    SequenceOptions o;
    o.interactions = false;
    const SequenceResult r = ramsey_scan(cfg, o);
    for (const auto& m : r.measurements) CHECK(m.overlap > 1.0 - 1e-9);
  }

  TEST_CASE("contrast measure equals C/sqrt(2) for a small-contrast sinusoid") {
    for (double C : {0.01, 0.05}) {
      const auto r = fringe(C, 1e-6, 1e-3);
      const auto m = contrast_measure(r, 150e-6);
      for (std::size_t i = 200; i < 800; i += 50) CHECK(m[i] == doctest::Approx(C / std::sqrt(2.0)).epsilon(0.01));
    }
  }

  TEST_CASE("halving dx and dt changes N1 at T_R = 8.6 ms by < 1e-3 N") {
    ExperimentConfig cfg = default_config();
    const double n1 = ramsey_run(cfg, 8.6e-3).N1;
    cfg.dynamics.dx *= 0.5;
    cfg.dynamics.dt *= 0.5;
    const double n2 = ramsey_run(cfg, 8.6e-3).N1;
    CHECK(std::abs(n1 - n2) < 1e-3 * cfg.dynamics.atom_number);
  }
}
