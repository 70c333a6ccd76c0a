#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

#include "chipdress/config.hpp"
#include "chipdress/error.hpp"
#include "chipdress/grid.hpp"
#include "chipdress/hermitian_jacobi.hpp"
#include "chipdress/io.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/units.hpp"

using namespace chipdress;
namespace u = chipdress::units;

namespace {
void require_close(double a, double b, double rel) {
  CHECK(std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)));
}
}  // namespace

TEST_SUITE("unit") {
  TEST_CASE("bundled configuration equals the built-in defaults") {
    const ExperimentConfig file = load_config(bundled_config_path());
    const ExperimentConfig def = default_config();
    require_close(file.trap.B0, def.trap.B0, 1e-10);
    require_close(file.trap.f_axial, def.trap.f_axial, 1e-10);
    require_close(file.microwave.detuning, def.microwave.detuning, 1e-10);
    require_close(file.microwave.Omega_ref, def.microwave.Omega_ref, 1e-10);
    require_close(file.microwave.I_ref, def.microwave.I_ref, 1e-10);
    require_close(file.constants.a01, def.constants.a01, 1e-10);
    require_close(file.ramsey.fringe_frequency, def.ramsey.fringe_frequency, 1e-10);
    CHECK(file.cpw.a1 == doctest::Approx(0.45));
    CHECK(file.dynamics.atom_number == 400);
  }

  TEST_CASE("config JSON round trip preserves every field") {
    ExperimentConfig cfg = default_config();
    cfg.microwave.power = 0.0731;
    cfg.trap.bias = Vec3(1e-6, 0, 0);
    cfg.ramsey.lo_detuning = 12345.0;
    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    // Unit conversions cost at most a few ulp per field.
    CHECK(io::round_numbers(config_to_json(back)) == io::round_numbers(config_to_json(cfg)));
  }

  TEST_CASE("config errors name the offending field") {
    auto j = config_to_json(default_config());
    j["dynamics"]["dx_um"] = -1.0;
    try {
      config_from_json(j).validate();
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("dx") != std::string::npos);
    }
    auto k = config_to_json(default_config());
    k["bogus"] = 1;
    CHECK_THROWS_AS(config_from_json(k), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("drive frequency reproduces the requested detuning") {
    const PhysicalConstants c;
    const double B = 3.23e-4, D = u::angular_from_kHz(150.0);
    const double w = resolve_drive_frequency(c, D, B);
    // Delta is a 1e-5 difference of GHz-scale terms: expect ~1e-11 relative.
    CHECK(local_detuning(c, w, B) == doctest::Approx(D).epsilon(1e-9));
  }

  TEST_CASE("grid indexing is x-fastest and validates") {
    Grid3 g{Vec3::Zero(), Vec3(1, 2, 3), {4, 3, 2}};
    CHECK(g.size() == 24);
    CHECK(g.index(1, 0, 0) == 1);
    CHECK(g.index(0, 1, 0) == 4);
    CHECK(g.point(1, 2, 1).isApprox(Vec3(1, 4, 3)));
    Grid3 bad{Vec3::Zero(), Vec3(0, 1, 1), {2, 1, 1}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("parallel_for visits each index once and rethrows") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(100, 4, [](std::size_t i) { if (i == 37) throw NumericalError("x"); }),
                    NumericalError);
  }
}

TEST_SUITE("property") {
  TEST_CASE("Jacobi eigensolver: unitarity, trace and reconstruction on random Hermitian matrices") {
    std::mt19937 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      Matrix8c A;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j <= i; ++j) {
          const Complex z = i == j ? Complex(n(rng), 0.0) : Complex(n(rng), n(rng));
          A(i, j) = z;
          A(j, i) = std::conj(z);
        }
      const HermitianJacobi<Matrix8c> J(A);
      REQUIRE(J.converged());
      const Matrix8c& V = J.eigenvectors();
      CHECK((V.adjoint() * V - Matrix8c::Identity()).norm() < 1e-12);
      CHECK(std::abs(J.eigenvalues().sum() - A.trace().real()) < 1e-12 * A.norm());
      CHECK((V * J.eigenvalues().cast<Complex>().asDiagonal() * V.adjoint() - A).norm() < 1e-12 * A.norm());
      for (int k = 1; k < 8; ++k) CHECK(J.eigenvalues()(k) >= J.eigenvalues()(k - 1));
    }
  }

  TEST_CASE("Jacobi eigensolver agrees with Eigen's self-adjoint solver") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Matrix8c A = Matrix8c::Zero();
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j <= i; ++j) {
          const Complex z = i == j ? Complex(d(rng), 0.0) : Complex(d(rng), d(rng));
          A(i, j) = z;
          A(j, i) = std::conj(z);
        }
      const HermitianJacobi<Matrix8c> J(A);
      const Eigen::SelfAdjointEigenSolver<Matrix8c> ref(A);
      CHECK((J.eigenvalues() - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}
