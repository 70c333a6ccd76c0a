#pragma once

#include <array>
#include <string>

#include "chipdress/config.hpp"
#include "chipdress/constants.hpp"
#include "chipdress/types.hpp"

namespace chipdress {

/// Bare ground-state hyperfine level |F, m_F>.
struct BareState {
  int F = 1;
  int m = -1;

  friend bool operator==(const BareState&, const BareState&) = default;
};

std::string to_string(const BareState& s);

/// Fixed basis order: |1,-1>, |1,0>, |1,1>, |2,-2>, ..., |2,2>, quantization
/// axis along the local static field.
namespace basis {

inline constexpr int size = 8;
inline constexpr std::array<BareState, size> states = {
    BareState{1, -1}, BareState{1, 0}, BareState{1, 1}, BareState{2, -2},
    BareState{2, -1}, BareState{2, 0}, BareState{2, 1}, BareState{2, 2}};

/// Index of |F,m> in `states`; throws std::out_of_range for invalid labels.
int index(const BareState& s);
inline int index(int F, int m) { return index(BareState{F, m}); }

}  // namespace basis

/// |0> = |1,-1>, |1> = |2,1>, |2> = |2,-1>.
inline constexpr BareState state_0{1, -1};
inline constexpr BareState state_1{2, 1};
inline constexpr BareState state_2{2, -1};

/// Electron spin J (J = 1/2, I = 3/2) in the |F,m> basis.
struct SpinOperators {
  Matrix8c Jz;
  Matrix8c Jplus;
  Matrix8c Jminus;
};

/// Built once from the |m_J, m_I> product basis with Clebsch-Gordan
/// coefficients in the (I, J) coupling order, which gives
/// <2,-1|J_z|1,-1> = -sqrt(3)/4.
const SpinOperators& electron_spin();

/// Microwave amplitude expressed in the frame whose z axis is along B:
/// components (x', y', z'), x' chosen deterministically.
CVec3 to_local_frame(const Vec3& B, const CVec3& B_mw);

/// Rabi frequencies Omega_{1,m1}^{2,m2} (rad/s), rows m2 = -2..2, columns
/// m1 = -1..1. Entries with |m2 - m1| > 1 are zero.
using RabiTable = Eigen::Matrix<Complex, 5, 3>;
using DetuningTable = Eigen::Matrix<double, 5, 3>;

RabiTable angular_momentum_couplings(const CVec3& B_mw_local, const PhysicalConstants& c);

inline Complex rabi(const RabiTable& t, int m1, int m2) { return t(m2 + 2, m1 + 1); }

/// Omega_R = Omega_{1,-1}^{2,-1} = -sqrt(3/4) mu_B B_par / hbar.
Complex rabi_frequency_R(const Vec3& B, const CVec3& B_mw, const PhysicalConstants& c);

/// 8x8 rotating-frame Hamiltonian (J) with its coupling metadata.
struct RwaHamiltonian {
  Matrix8c matrix = Matrix8c::Zero();
  double hbar = 0.0;
  double delta0 = 0.0;   // omega - omega_hfs, rad/s
  double omega_L = 0.0;  // mu_B B / 2 hbar, rad/s
  RabiTable rabi = RabiTable::Zero();
  DetuningTable detuning = DetuningTable::Zero();  // Delta_{1,m1}^{2,m2}, rad/s

  Complex rabi_at(int m1, int m2) const { return rabi(m2 + 2, m1 + 1); }
  double detuning_at(int m1, int m2) const { return detuning(m2 + 2, m1 + 1); }
};

/// Assemble the RWA Hamiltonian at a point. Diagonal entries are
/// -hbar Delta0/2 + hbar w_L m2 (F = 2) and +hbar Delta0/2 - hbar w_L m1
/// (F = 1) for the linear Zeeman model; the Breit-Rabi option replaces them
/// by exact static Zeeman energies in the same rotating frame. Throws
/// NumericalError when |B| = 0 (quantization axis undefined).
RwaHamiltonian build_rwa_hamiltonian(const Vec3& B, const CVec3& B_mw, double omega, const PhysicalConstants& c,
                                     ZeemanModel zeeman = ZeemanModel::linear);

/// Eigen-decomposition of an RwaHamiltonian with adiabatic labels.
struct DressedSpectrum {
  Vector8d energies = Vector8d::Zero();  // ascending, J
  Matrix8c vectors = Matrix8c::Identity();
  std::array<int, 8> label{};    // eigen index -> bare basis index
  std::array<int, 8> index_of{}; // bare basis index -> eigen index
  bool ambiguous = false;        // a labelling tie was broken by energy order

  double energy(const BareState& s) const { return energies(index_of[basis::index(s)]); }
  Vector8c state(const BareState& s) const { return vectors.col(index_of[basis::index(s)]); }
};

/// Diagonalize with the Jacobi solver (tolerance 1e-14 of the matrix norm)
/// and label each dressed state by maximal overlap with `reference` (or with
/// the bare basis when none is given).
DressedSpectrum dressed_spectrum(const RwaHamiltonian& H, const DressedSpectrum* reference = nullptr);

/// Second-order shifts +hbar|Omega|^2/4Delta (F = 1) and -hbar|Omega|^2/4Delta
/// (F = 2) summed over all coupled transitions, indexed like basis::states.
struct PerturbativeShifts {
  Vector8d shift = Vector8d::Zero();  // J
  Vector8d magnitude = Vector8d::Zero();  // sum of |individual shifts|, J
  bool regime_valid = true;           // every coupled |Omega| < |Delta|
};

/// Throws NumericalError("perturbative limit invalid") when a coupled
/// transition has Delta = 0.
PerturbativeShifts perturbative_shifts(const RwaHamiltonian& H);

/// <2,-1|0bar> with the phase fixed so that <1,-1|0bar> is real positive.
Complex admixture(const DressedSpectrum& spectrum);

}  // namespace chipdress
