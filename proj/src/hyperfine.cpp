#include "chipdress/hyperfine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chipdress/error.hpp"
#include "chipdress/hermitian_jacobi.hpp"

namespace chipdress {

std::string to_string(const BareState& s) {
  return "|" + std::to_string(s.F) + "," + std::to_string(s.m) + ">";
}

int basis::index(const BareState& s) {
  if (s.F == 1 && s.m >= -1 && s.m <= 1) return s.m + 1;
  if (s.F == 2 && s.m >= -2 && s.m <= 2) return s.m + 5;
  throw std::out_of_range("bare state " + to_string(s) + " not in the ground-state basis");
}

// ------------------------------------------------------------ spin algebra

namespace {

// Product basis |m_J, m_I>: index = (m_J + 1/2) * 4 + (m_I + 3/2).
int product_index(int twice_mJ, int twice_mI) { return ((twice_mJ + 1) / 2) * 4 + (twice_mI + 3) / 2; }

SpinOperators build_spin_operators() {
  constexpr double I = 1.5;
  // Columns: coupled states in basis order, expressed in the product basis.
  Eigen::Matrix<double, 8, 8> U = Eigen::Matrix<double, 8, 8>::Zero();
  for (int k = 0; k < basis::size; ++k) {
    const auto [F, m] = basis::states[static_cast<std::size_t>(k)];
    const double sign = (F == 2) ? 1.0 : -1.0;
    // |F = I +- 1/2, m> = +-sqrt((I +- m + 1/2)/(2I+1)) |up, m-1/2>
    //                    + sqrt((I -+ m + 1/2)/(2I+1)) |down, m+1/2>
    const double up = sign * std::sqrt(std::max(0.0, (I + sign * m + 0.5) / (2 * I + 1)));
    const double dn = std::sqrt(std::max(0.0, (I - sign * m + 0.5) / (2 * I + 1)));
    const int mI_up = 2 * m - 1, mI_dn = 2 * m + 1;
    if (std::abs(mI_up) <= 3) U(product_index(1, mI_up), k) = up;
    if (std::abs(mI_dn) <= 3) U(product_index(-1, mI_dn), k) = dn;
  }

  Eigen::Matrix<double, 8, 8> jz = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 8> jp = Eigen::Matrix<double, 8, 8>::Zero();
  for (int mI = -3; mI <= 3; mI += 2) {
    jz(product_index(1, mI), product_index(1, mI)) = 0.5;
    jz(product_index(-1, mI), product_index(-1, mI)) = -0.5;
    jp(product_index(1, mI), product_index(-1, mI)) = 1.0;
  }

  SpinOperators ops;
  ops.Jz = (U.transpose() * jz * U).cast<Complex>();
  ops.Jplus = (U.transpose() * jp * U).cast<Complex>();
  ops.Jminus = ops.Jplus.adjoint();
  return ops;
}

}  // namespace

const SpinOperators& electron_spin() {
  static const SpinOperators ops = build_spin_operators();
  return ops;
}

CVec3 to_local_frame(const Vec3& B, const CVec3& B_mw) {
  const double Bn = B.norm();
  if (!(Bn > 0.0)) throw NumericalError("quantization axis undefined (|B| = 0)");
  const Vec3 ez = B / Bn;
  // Lab axis least aligned with B seeds x'.
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(ez(i)) < std::abs(ez(k))) k = i;
  Vec3 e = Vec3::Zero();
  e(k) = 1.0;
  const Vec3 ex = (e - e.dot(ez) * ez).normalized();
  const Vec3 ey = ez.cross(ex);
  return CVec3(ex.cast<Complex>().transpose() * B_mw, ey.cast<Complex>().transpose() * B_mw,
               ez.cast<Complex>().transpose() * B_mw);
}

RabiTable angular_momentum_couplings(const CVec3& b, const PhysicalConstants& c) {
  const auto& J = electron_spin();
  const Complex Bplus = b.x() + Complex(0, 1) * b.y();
  const Complex Bminus = b.x() - Complex(0, 1) * b.y();
  const Matrix8c V = b.z() * J.Jz + 0.5 * (Bminus * J.Jplus + Bplus * J.Jminus);
  const double pref = 2.0 * c.mu_B / c.hbar;
  RabiTable t = RabiTable::Zero();
  for (int m1 = -1; m1 <= 1; ++m1)
    for (int m2 = -2; m2 <= 2; ++m2) {
      if (std::abs(m2 - m1) > 1) continue;
      t(m2 + 2, m1 + 1) = pref * V(basis::index(2, m2), basis::index(1, m1));
    }
  return t;
}

Complex rabi_frequency_R(const Vec3& B, const CVec3& B_mw, const PhysicalConstants& c) {
  return rabi(angular_momentum_couplings(to_local_frame(B, B_mw), c), -1, -1);
}

// ------------------------------------------------------------ Hamiltonian

namespace {

// Static Zeeman energy (J) of |F,m> in field B, centred so that the zero-field
// levels sit at +-hbar w_hfs / 2.
double breit_rabi_energy(int F, int m, double B, const PhysicalConstants& c) {
  constexpr double I = 1.5;
  const double dE = c.hbar * c.omega_hfs;
  const double x = (c.g_J - c.g_I) * c.mu_B * B / dE;
  const double linear = c.g_I * c.mu_B * m * B;
  double root;
  if (F == 2 && std::abs(m) == 2)
    root = 1.0 + (m > 0 ? x : -x);  // stretched states: exact, sign-preserving
  else
    root = std::sqrt(1.0 + 4.0 * m * x / (2 * I + 1) + x * x);
  return linear + (F == 2 ? 0.5 : -0.5) * dE * root;
}

}  // namespace

RwaHamiltonian build_rwa_hamiltonian(const Vec3& B, const CVec3& B_mw, double omega, const PhysicalConstants& c,
                                     ZeemanModel zeeman) {
  const double Bn = B.norm();
  if (!(Bn > 0.0)) throw NumericalError("quantization axis undefined (|B| = 0)");
  if (!B_mw.allFinite() || !std::isfinite(omega)) throw NumericalError("build_rwa_hamiltonian: non-finite input");

  RwaHamiltonian H;
  H.hbar = c.hbar;
  H.delta0 = omega - c.omega_hfs;
  H.omega_L = c.mu_B * Bn / (2.0 * c.hbar);

  for (int k = 0; k < basis::size; ++k) {
    const auto [F, m] = basis::states[static_cast<std::size_t>(k)];
    double e;
    if (zeeman == ZeemanModel::linear)
      e = (F == 2) ? -0.5 * c.hbar * H.delta0 + c.hbar * H.omega_L * m
                   : 0.5 * c.hbar * H.delta0 - c.hbar * H.omega_L * m;
    else
      e = breit_rabi_energy(F, m, Bn, c) + (F == 2 ? -0.5 : 0.5) * c.hbar * omega;
    H.matrix(k, k) = e;
  }

  H.rabi = angular_momentum_couplings(to_local_frame(B, B_mw), c);
  for (int m1 = -1; m1 <= 1; ++m1)
    for (int m2 = -2; m2 <= 2; ++m2) {
      const int i1 = basis::index(1, m1), i2 = basis::index(2, m2);
      H.detuning(m2 + 2, m1 + 1) = (std::real(H.matrix(i1, i1)) - std::real(H.matrix(i2, i2))) / c.hbar;
      const Complex w = 0.5 * c.hbar * H.rabi(m2 + 2, m1 + 1);
      H.matrix(i2, i1) = w;
      H.matrix(i1, i2) = std::conj(w);
    }
  return H;
}

// ------------------------------------------------------------ spectrum

DressedSpectrum dressed_spectrum(const RwaHamiltonian& H, const DressedSpectrum* reference) {
  const HermitianJacobi<Matrix8c> solver(H.matrix, 1e-14);
  if (!solver.converged()) throw NumericalError("dressed_spectrum: Jacobi iteration did not converge");

  DressedSpectrum s;
  s.energies = solver.eigenvalues();
  s.vectors = solver.eigenvectors();

  // overlap(b, n) = |<ref_b|v_n>|^2
  Eigen::Matrix<double, 8, 8> overlap;
  for (int b = 0; b < 8; ++b) {
    const Vector8c ref = reference ? Vector8c(reference->vectors.col(reference->index_of[b]))
                                   : Vector8c(Vector8c::Unit(b));
    for (int n = 0; n < 8; ++n) overlap(b, n) = std::norm(ref.dot(s.vectors.col(n)));
  }

  struct Pair {
    double w;
    int n, b;
  };
  std::vector<Pair> pairs;
  pairs.reserve(64);
  for (int n = 0; n < 8; ++n)
    for (int b = 0; b < 8; ++b) pairs.push_back({overlap(b, n), n, b});
  // Largest overlap first; ties resolved by energy order, then basis order.
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.w > b.w; });

  constexpr double tie = 1e-9;
  std::array<bool, 8> used_n{}, used_b{};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& p = pairs[i];
    if (used_n[p.n] || used_b[p.b]) continue;
    for (std::size_t j = i + 1; j < pairs.size() && pairs[j].w > p.w - tie; ++j) {
      const Pair& q = pairs[j];
      if (used_n[q.n] || used_b[q.b]) continue;
      if ((q.n == p.n) != (q.b == p.b) && p.w > tie) s.ambiguous = true;
    }
    used_n[p.n] = used_b[p.b] = true;
    s.label[p.n] = p.b;
    s.index_of[p.b] = p.n;
  }

  // Phase convention: the labelled bare component is real and non-negative.
  for (int n = 0; n < 8; ++n) {
    const Complex a = s.vectors(s.label[n], n);
    if (std::abs(a) > 0.0) s.vectors.col(n) *= std::conj(a) / std::abs(a);
  }
  return s;
}

PerturbativeShifts perturbative_shifts(const RwaHamiltonian& H) {
  PerturbativeShifts out;
  for (int m1 = -1; m1 <= 1; ++m1)
    for (int m2 = m1 - 1; m2 <= m1 + 1; ++m2) {
      if (m2 < -2 || m2 > 2) continue;
      const double om2 = std::norm(H.rabi_at(m1, m2));
      if (om2 == 0.0) continue;
      const double delta = H.detuning_at(m1, m2);
      // Detunings are GHz-scale differences; below this they are rounding noise.
      if (std::abs(delta) < 1e-6 * std::sqrt(om2)) throw NumericalError("perturbative limit invalid (resonant coupled transition)");
      if (om2 >= delta * delta) out.regime_valid = false;
      const double shift = H.hbar * om2 / (4.0 * delta);
      out.shift(basis::index(1, m1)) += shift;
      out.shift(basis::index(2, m2)) -= shift;
      out.magnitude(basis::index(1, m1)) += std::abs(shift);
      out.magnitude(basis::index(2, m2)) += std::abs(shift);
    }
  return out;
}

Complex admixture(const DressedSpectrum& spectrum) {
  return spectrum.state(state_0)(basis::index(state_2));
}

}  // namespace chipdress
