#include "chipdress/potentials.hpp"

#include <cmath>

#include "chipdress/error.hpp"
#include "chipdress/log.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/trapchar.hpp"

namespace chipdress {

PotentialModel::PotentialModel(const ExperimentConfig& cfg) : cfg_(resolve_calibration(cfg)) {
  cfg_.validate();
  trap_ = StaticTrapModel::from_config(cfg_);
  mw_on_ = cfg_.microwave_on();
  const double B_min = trap_.field(cfg_.trap.r_min).norm();
  omega_ = resolve_drive_frequency(cfg_.constants, cfg_.microwave.detuning, B_min);
  I_mw_ = mw_on_ ? cfg_.microwave.I_ref * std::sqrt(cfg_.microwave.power / cfg_.microwave.P_ref) : 0.0;
}

FieldSample PotentialModel::fields(const Vec3& r) const {
  FieldSample f;
  f.B = trap_.field(r);
  if (mw_on_) {
    f.B_mw = cpw_microwave_field(cfg_.cpw, I_mw_, r, cfg_.constants.mu0);
    if (cfg_.terms.electric)
      f.E = cpw_electric_field(cfg_.cpw, cfg_.microwave.power, cfg_.microwave.impedance, r);
  }
  return f;
}

RwaHamiltonian PotentialModel::hamiltonian(const FieldSample& f) const {
  return build_rwa_hamiltonian(f.B, f.B_mw, omega_, cfg_.constants, cfg_.terms.zeeman);
}

RwaHamiltonian PotentialModel::hamiltonian(const Vec3& r) const { return hamiltonian(fields(r)); }

double PotentialModel::common_terms(const Vec3& r, const FieldSample& f) const {
  const auto& c = cfg_.constants;
  const auto& t = cfg_.terms;
  double V = 0.0;
  if (t.gravity) V -= c.mass * c.g_grav * t.gravity_direction.normalized().dot(r - cfg_.trap.r_min);
  if (t.electric) V -= 0.25 * c.alpha0 * f.E.squaredNorm();
  if (t.casimir_polder && r.z() > 0.0) {
    const double z = std::max(r.z(), t.cp_cutoff);
    V -= c.C4 / (z * z * z * z);
  }
  return V;
}

namespace {

// Dressed-frame offset that makes V -> V_Z far from the CPW.
double frame_offset(const BareState& s, double hbar, double delta0) {
  return (s.F == 1 ? -0.5 : 0.5) * hbar * delta0;
}

// Bare-level energy with B_mw = 0 in the linear model, without round-off
// from the rotating-frame offsets.
double bare_linear(const BareState& s, double hbar, double omega_L) {
  return (s.F == 2 ? 1.0 : -1.0) * hbar * omega_L * s.m;
}

}  // namespace

double PotentialModel::potential(const BareState& label, const Vec3& r, PotentialMode mode,
                                 const DressedSpectrum* reference, DressedSpectrum* labelled) const {
  const int idx = basis::index(label);
  const FieldSample f = fields(r);
  const double common = common_terms(r, f);
  const auto& c = cfg_.constants;

  if (!mw_on_ && cfg_.terms.zeeman == ZeemanModel::linear) {
    const double B = f.B.norm();
    if (!(B > 0.0)) throw NumericalError("quantization axis undefined (|B| = 0)");
    return bare_linear(label, c.hbar, c.mu_B * B / (2.0 * c.hbar)) + common;
  }

  const RwaHamiltonian H = hamiltonian(f);
  const double offset = frame_offset(label, c.hbar, H.delta0);
  if (mode == PotentialMode::perturbative) {
    const auto shifts = perturbative_shifts(H);
    return std::real(H.matrix(idx, idx)) + offset + shifts.shift(idx) + common;
  }
  DressedSpectrum s = dressed_spectrum(H, reference);
  if (s.ambiguous) log::warn("ambiguous dressed-state labelling at r = (" + std::to_string(r.x() * 1e6) + ", " +
                             std::to_string(r.y() * 1e6) + ", " + std::to_string(r.z() * 1e6) + ") um");
  if (labelled) *labelled = s;
  return s.energy(label) + offset + common;
}

PotentialBreakdown PotentialModel::breakdown(const Vec3& r, const DressedSpectrum* reference,
                                             DressedSpectrum* labelled) const {
  const auto& c = cfg_.constants;
  const FieldSample f = fields(r);
  const RwaHamiltonian H = hamiltonian(f);
  PotentialBreakdown b;
  b.V_Z = 0.5 * c.mu_B * f.B.norm();
  b.common = common_terms(r, f);

  const DressedSpectrum s = dressed_spectrum(H, reference);
  if (labelled) *labelled = s;
  b.ambiguous = s.ambiguous;
  b.V0 = s.energy(state_0) + frame_offset(state_0, c.hbar, H.delta0) + b.common;
  b.V1 = s.energy(state_1) + frame_offset(state_1, c.hbar, H.delta0) + b.common;

  // Static level in the same frame; the microwave part is what remains.
  const int i0 = basis::index(state_0), i1 = basis::index(state_1);
  const double static0 = std::real(H.matrix(i0, i0)) + frame_offset(state_0, c.hbar, H.delta0);
  const double static1 = std::real(H.matrix(i1, i1)) + frame_offset(state_1, c.hbar, H.delta0);
  b.Vmw_exact = b.V0 - b.common - static0;
  b.V1mw_exact = b.V1 - b.common - static1;

  b.rabi_R = H.rabi_at(-1, -1);
  b.detuning = H.detuning_at(-1, -1);
  if (std::norm(b.rabi_R) > 0.0) {
    if (b.detuning == 0.0) throw NumericalError("perturbative limit invalid (resonant coupled transition)");
    b.Vmw_pert_R = c.hbar * std::norm(b.rabi_R) / (4.0 * b.detuning);
  }
  const auto shifts = perturbative_shifts(H);
  b.Vmw_pert = shifts.shift(i0);
  b.Vmw_pert_scale = shifts.magnitude(i0);
  b.V1mw_pert = shifts.shift(i1);
  for (int m2 = -2; m2 <= 0; ++m2) {
    const double om = std::abs(H.rabi_at(-1, m2));
    if (om > 0.0) b.ratio = std::max(b.ratio, om / std::abs(H.detuning_at(-1, m2)));
  }
  return b;
}

std::vector<std::string> PotentialModel::provenance() const {
  std::vector<std::string> p;
  p.push_back(cfg_.terms.zeeman == ZeemanModel::linear ? "zeeman:linear" : "zeeman:breit_rabi");
  if (mw_on_) p.push_back("microwave:dressed_rwa");
  if (cfg_.terms.gravity) p.push_back("gravity");
  if (cfg_.terms.electric && mw_on_) p.push_back("electric:line_charge");
  if (cfg_.terms.casimir_polder) p.push_back("casimir_polder:C4");
  return p;
}

double state_potential(const BareState& label, const Vec3& r, const ExperimentConfig& cfg, PotentialMode mode) {
  basis::index(label);
  return PotentialModel(cfg).potential(label, r, mode);
}

PotentialGrid potential_slice(const PotentialModel& model, const Grid3& grid, unsigned workers) {
  grid.validate();
  PotentialGrid out;
  out.grid = grid;
  out.provenance = model.provenance();
  const std::size_t n = grid.size();
  out.V0.assign(n, 0.0);
  out.V1.assign(n, 0.0);
  out.Vmw_exact.assign(n, 0.0);
  out.Vmw_pert.assign(n, 0.0);

  const int nx = grid.counts[0], ny = grid.counts[1], nz = grid.counts[2];
  parallel_for(static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz), workers, [&](std::size_t line) {
    const int j = static_cast<int>(line % static_cast<std::size_t>(ny));
    const int k = static_cast<int>(line / static_cast<std::size_t>(ny));
    DressedSpectrum reference;
    for (int i = 0; i < nx; ++i) {
      const std::size_t at = grid.index(i, j, k);
      const Vec3 r = grid.point(i, j, k);
      if (model.config().microwave_on()) {
        DressedSpectrum current;
        const PotentialBreakdown b = model.breakdown(r, i == 0 ? nullptr : &reference, &current);
        reference = current;
        out.V0[at] = b.V0;
        out.V1[at] = b.V1;
        out.Vmw_exact[at] = b.Vmw_exact;
        out.Vmw_pert[at] = b.Vmw_pert;
      } else {
        out.V0[at] = model.potential(state_0, r);
        out.V1[at] = model.potential(state_1, r);
      }
      if (!std::isfinite(out.V0[at]) || !std::isfinite(out.V1[at]))
        throw NumericalError("potential_slice: non-finite potential");
    }
  });
  return out;
}

PotentialGrid potential_slice(const ExperimentConfig& cfg, const Grid3& grid, unsigned workers) {
  return potential_slice(PotentialModel(cfg), grid, workers);
}

}  // namespace chipdress
