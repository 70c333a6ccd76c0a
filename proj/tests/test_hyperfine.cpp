#include <doctest.h>

#include <cmath>

#include "chipdress/error.hpp"
#include "chipdress/hyperfine.hpp"
#include "chipdress/units.hpp"

using namespace chipdress;
namespace u = chipdress::units;

namespace {

const PhysicalConstants c;
const Vec3 B_bottom(3.23e-4, 0.0, 0.0);

// Drive frequency putting |1,-1> <-> |2,-1> at detuning D for field B.
double drive(double D, double B = 3.23e-4) { return resolve_drive_frequency(c, D, B); }

// pi-polarised amplitude giving Rabi frequency Omega on |1,-1> <-> |2,-1>.
CVec3 pi_field(double Omega) {
  return CVec3(Complex(Omega * c.hbar / (std::sqrt(0.75) * c.mu_B), 0.0), 0.0, 0.0);
}

}  // namespace

TEST_SUITE("unit") {
  TEST_CASE("Clebsch-Gordan matrix element <2,-1|J_z|1,-1> = -sqrt(3)/4") {
    const auto& J = electron_spin();
    CHECK(J.Jz(basis::index(2, -1), basis::index(1, -1)).real() == doctest::Approx(-std::sqrt(3.0) / 4.0));
    for (int m = -1; m <= 1; ++m)
      CHECK(J.Jz(basis::index(1, m), basis::index(1, m)).real() == doctest::Approx(-m / 4.0));
    for (int m = -2; m <= 2; ++m)
      CHECK(J.Jz(basis::index(2, m), basis::index(2, m)).real() == doctest::Approx(m / 4.0));
  }

  TEST_CASE("Rabi frequency of a field along B is -sqrt(3/4) mu_B B_par / hbar") {
    const CVec3 Bmw(Complex(1e-6, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0));
    const Complex W = rabi_frequency_R(B_bottom, Bmw, c);
    CHECK(W.real() == doctest::Approx(-std::sqrt(0.75) * c.mu_B * 1e-6 / c.hbar).epsilon(1e-12));
    // Only the component along B drives the pi transition.
    const CVec3 perp(Complex(0.0, 0.0), Complex(1e-6, 0.0), Complex(0.0, 0.0));
    CHECK(std::abs(rabi_frequency_R(B_bottom, perp, c)) < 1e-9 * std::abs(W));
  }

  TEST_CASE("RWA Hamiltonian is Hermitian with the stated diagonal and detuning metadata") {
    const double D = u::angular_from_kHz(150.0);
    const CVec3 Bmw(Complex(3e-7, 1e-7), Complex(2e-7, 0.0), Complex(-1e-7, 0.5e-7));
    const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, Bmw, drive(D), c);
    CHECK((H.matrix - H.matrix.adjoint()).norm() < 1e-15 * H.matrix.norm());
    CHECK(H.detuning_at(-1, -1) == doctest::Approx(D).epsilon(1e-9));
    const int a = basis::index(1, -1), b = basis::index(2, -1);
    CHECK((H.matrix(a, a) - H.matrix(b, b)).real() / c.hbar == doctest::Approx(D).epsilon(1e-9));
    CHECK(std::abs(H.matrix(b, a) - 0.5 * c.hbar * H.rabi_at(-1, -1)) < 1e-12 * std::abs(H.matrix(b, a)));
  }

  TEST_CASE("zero static field has no quantization axis") {
    CHECK_THROWS_AS(build_rwa_hamiltonian(Vec3::Zero(), pi_field(1e5), drive(1e6), c), NumericalError);
  }

  TEST_CASE("perturbative shift: +hbar|W|^2/4D on |1,-1>, throws on resonance") {
    const double D = u::angular_from_kHz(600.0), W = u::angular_from_kHz(100.0);
    const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(D), c);
    const PerturbativeShifts s = perturbative_shifts(H);
    CHECK(s.shift(basis::index(1, -1)) == doctest::Approx(c.hbar * W * W / (4 * D)).epsilon(1e-9));
    CHECK(s.shift(basis::index(2, -1)) == doctest::Approx(-c.hbar * W * W / (4 * D)).epsilon(1e-9));
    CHECK(s.regime_valid);
    const RwaHamiltonian R = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(0.0), c);
    CHECK_THROWS_AS(perturbative_shifts(R), NumericalError);
  }

  TEST_CASE("dressed |0bar> shift follows the two-level closed form for pi polarisation") {
    const double W = u::angular_from_kHz(122.0);
    for (double D_kHz : {-600.0, -150.0, 50.0, 150.0, 600.0}) {
      const double D = u::angular_from_kHz(D_kHz);
      const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(D), c);
      const DressedSpectrum s = dressed_spectrum(H);
      const double bare = H.matrix(basis::index(1, -1), basis::index(1, -1)).real();
      const double sgn = D > 0 ? 1.0 : -1.0;
      const double expected = 0.5 * c.hbar * sgn * (std::sqrt(D * D + W * W) - std::abs(D));
      CHECK(s.energy(state_0) - bare == doctest::Approx(expected).epsilon(1e-9));
      CHECK_FALSE(s.ambiguous);
    }
  }

  TEST_CASE("admixture of |2,-1> in |0bar> is about Omega/2Delta") {
    const double D = u::angular_from_kHz(600.0), W = u::angular_from_kHz(60.0);
    const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(D), c);
    const Complex a = admixture(dressed_spectrum(H));
    const double r = W / D;
    CHECK(std::abs(std::abs(a) - 0.5 * r) <= r * r * 0.5 * r);
  }

  TEST_CASE("Breit-Rabi clock pair: differential shift has the magic-field curvature") {
    // E(|2,1>) - E(|1,-1>) is stationary near 3.23 G with curvature ~431 Hz/G^2.
    auto diff = [&](double B) {
      const RwaHamiltonian H = build_rwa_hamiltonian(Vec3(B, 0, 0), CVec3::Zero(), drive(0.0), c,
                                                     ZeemanModel::breit_rabi);
      return (H.matrix(basis::index(2, 1), basis::index(2, 1)) - H.matrix(basis::index(1, -1), basis::index(1, -1)))
                 .real() /
             c.planck();
    };
    const double h = 0.05 * u::gauss;
    const double B = 3.23e-4;
    const double d1 = (diff(B + h) - diff(B - h)) / (2 * h) * u::gauss;             // Hz/G
    const double d2 = (diff(B + h) - 2 * diff(B) + diff(B - h)) / (h * h) * u::gauss * u::gauss;  // Hz/G^2
    CHECK(std::abs(d1) < 20.0);
    CHECK(0.5 * d2 == doctest::Approx(431.36).epsilon(0.02));
  }
}

TEST_SUITE("property") {
  TEST_CASE("spin operators satisfy the angular-momentum algebra") {
    const auto& J = electron_spin();
    CHECK((J.Jz * J.Jplus - J.Jplus * J.Jz - J.Jplus).norm() < 1e-14);
    CHECK((J.Jplus * J.Jminus - J.Jminus * J.Jplus - 2.0 * J.Jz).norm() < 1e-14);
    CHECK((J.Jminus - J.Jplus.adjoint()).norm() < 1e-14);
    // J^2 = 3/4 on the whole manifold.
    const Matrix8c J2 = J.Jz * J.Jz + 0.5 * (J.Jplus * J.Jminus + J.Jminus * J.Jplus);
    CHECK((J2 - 0.75 * Matrix8c::Identity()).norm() < 1e-14);
  }

  TEST_CASE("avoided crossing: minimum splitting of the resonant pair is hbar|Omega|") {
    for (double W_kHz : {10.0, 122.0, 400.0}) {
      const double W = u::angular_from_kHz(W_kHz);
      const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(0.0), c);
      const DressedSpectrum s = dressed_spectrum(H);
      // The pi-coupled pair is the only resonant one; its eigenvalues straddle the bare level.
      const double e = H.matrix(basis::index(1, -1), basis::index(1, -1)).real();
      std::vector<double> near;
      for (int k = 0; k < 8; ++k)
        if (std::abs(s.energies(k) - e) < c.hbar * W) near.push_back(s.energies(k));
      REQUIRE(near.size() == 2);
      CHECK(std::abs(near[1] - near[0]) == doctest::Approx(c.hbar * W).epsilon(1e-10));
    }
  }

  TEST_CASE("dressed spectrum: unitary eigenvectors and trace preserved on random fields") {
    std::srand(3);
    for (int trial = 0; trial < 100; ++trial) {
      auto rnd = [] { return 2.0 * std::rand() / RAND_MAX - 1.0; };
      const Vec3 B(3e-4 * (1 + 0.5 * rnd()), 1e-4 * rnd(), 1e-4 * rnd());
      const CVec3 Bmw(Complex(1e-6 * rnd(), 1e-6 * rnd()), Complex(1e-6 * rnd(), 0), Complex(1e-6 * rnd(), 0));
      const RwaHamiltonian H = build_rwa_hamiltonian(B, Bmw, drive(u::angular_from_kHz(300 * rnd())), c);
      const DressedSpectrum s = dressed_spectrum(H);
      CHECK((s.vectors.adjoint() * s.vectors - Matrix8c::Identity()).norm() < 1e-12);
      CHECK(std::abs(s.energies.sum() - H.matrix.trace().real()) < 1e-12 * H.matrix.norm());
      std::array<int, 8> seen{};
      for (int k = 0; k < 8; ++k) seen[static_cast<std::size_t>(s.label[static_cast<std::size_t>(k)])]++;
      for (int v : seen) CHECK(v == 1);
    }
  }

  TEST_CASE("labels carried through resonance follow the adiabatic state continuously") {
    const double W = u::angular_from_kHz(100.0);
    DressedSpectrum prev;
    bool have = false;
    double last = 0.0;
    double max_jump = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double D = u::angular_from_kHz(-600.0 + 3.0 * i);
      const RwaHamiltonian H = build_rwa_hamiltonian(B_bottom, pi_field(W), drive(D), c);
      const DressedSpectrum s = dressed_spectrum(H, have ? &prev : nullptr);
      const double e = s.energy(state_0);
      if (have) max_jump = std::max(max_jump, std::abs(e - last));
      last = e;
      prev = s;
      have = true;
    }
    // A continuous branch moves by at most h * 1.5 kHz per 3 kHz step; a
    // label swap near resonance would jump by about h * 100 kHz.
    CHECK(max_jump < c.planck() * 2e3);
  }
}
