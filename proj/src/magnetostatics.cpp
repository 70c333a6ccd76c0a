#include "chipdress/magnetostatics.hpp"

#include <cmath>
#include <numbers>

#include "chipdress/error.hpp"
#include "chipdress/units.hpp"

namespace chipdress {

// ---------------------------------------------------------------- geometry

Vec3 WireSegment::width_axis() const { return height_axis().cross(direction()).normalized(); }

Vec3 WireSegment::height_axis() const {
  const Vec3 l = direction();
  return (normal - normal.dot(l) * l).normalized();
}

void WireSegment::validate() const {
  if (!start.allFinite() || !end.allFinite() || !std::isfinite(current))
    throw ConfigError("wire: non-finite geometry or current");
  if (!(length() > 0.0)) throw ConfigError("wire: length must be > 0");
  if (!(width > 0.0 && height > 0.0)) throw ConfigError("wire: cross-section must be > 0");
  const Vec3 l = direction();
  if ((normal - normal.dot(l) * l).norm() < 1e-9 * normal.norm())
    throw ConfigError("wire: normal must not be parallel to the wire");
}

std::array<WireSegment, 3> CpwGeometry::wires(double I_mw) const {
  auto make = [&](double x, double current) {
    WireSegment w;
    w.start = Vec3(x, -0.5 * length, -0.5 * height);
    w.end = Vec3(x, 0.5 * length, -0.5 * height);
    w.width = width;
    w.height = height;
    w.current = current;
    w.kind = CurrentKind::microwave;
    return w;
  };
  const double pitch = ground_pitch();
  return {make(signal_x, I_mw), make(signal_x - pitch, -a1 * I_mw), make(signal_x + pitch, -a2 * I_mw)};
}

void CpwGeometry::validate() const {
  if (!(width > 0.0 && height > 0.0)) throw ConfigError("cpw: wire cross-section must be > 0");
  if (!(length > 0.0)) throw ConfigError("cpw.length_um must be > 0");
  if (!(ground_gap > 0.0)) throw ConfigError("cpw.ground_gap_um must be > 0");
  if (!(a1 >= 0.0 && a2 >= 0.0)) throw ConfigError("cpw.ground_fraction entries must be >= 0");
  if (std::abs(a1 + a2 - 1.0) > 1e-12)
    throw ConfigError("cpw.ground_fraction must sum to 1 (net microwave current zero)");
}

// ---------------------------------------------------------- Biot-Savart

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> gl_x = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                        0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> gl_w = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};

// Field of a thin straight filament from a to a + L l (unit l), per unit
// mu0 I / 4 pi.
Vec3 filament_kernel(const Vec3& a, const Vec3& l, double L, const Vec3& r) {
  const Vec3 ra = r - a;
  const double s = ra.dot(l);
  const Vec3 rho = ra - s * l;
  const double rho2 = rho.squaredNorm();
  if (rho2 <= 1e-36) return Vec3::Zero();
  const double d1 = ra.norm();
  const double d2 = (ra - L * l).norm();
  const double bracket = (L - s) / d2 + s / d1;
  return l.cross(rho) * (bracket / rho2);
}

struct Bar {
  Vec3 origin;  // start point of the centre line
  Vec3 l, w, h;
  double L;
};

// Tensor Gauss over the cell [u0,u1] x [v0,v1] of the cross-section,
// returning the average kernel weighted by the cell's area fraction.
Vec3 cell_rule(const Bar& bar, const Vec3& r, double u0, double u1, double v0, double v1) {
  const double cu = 0.5 * (u0 + u1), hu = 0.5 * (u1 - u0);
  const double cv = 0.5 * (v0 + v1), hv = 0.5 * (v1 - v0);
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < gl_x.size(); ++i)
    for (std::size_t j = 0; j < gl_x.size(); ++j) {
      const Vec3 a = bar.origin + (cu + hu * gl_x[i]) * bar.w + (cv + hv * gl_x[j]) * bar.h;
      sum += (gl_w[i] * gl_w[j]) * filament_kernel(a, bar.l, bar.L, r);
    }
  return sum * (hu * hv);
}

Vec3 adaptive(const Bar& bar, const Vec3& r, double u0, double u1, double v0, double v1,
              const Vec3& coarse, double tol, int depth) {
  const double um = 0.5 * (u0 + u1), vm = 0.5 * (v0 + v1);
  const Vec3 q00 = cell_rule(bar, r, u0, um, v0, vm);
  const Vec3 q10 = cell_rule(bar, r, um, u1, v0, vm);
  const Vec3 q01 = cell_rule(bar, r, u0, um, vm, v1);
  const Vec3 q11 = cell_rule(bar, r, um, u1, vm, v1);
  const Vec3 fine = q00 + q10 + q01 + q11;
  if (depth >= 10 || (fine - coarse).norm() <= tol) return fine;
  const double t = 0.5 * tol;
  return adaptive(bar, r, u0, um, v0, vm, q00, t, depth + 1) +
         adaptive(bar, r, um, u1, v0, vm, q10, t, depth + 1) +
         adaptive(bar, r, u0, um, vm, v1, q01, t, depth + 1) +
         adaptive(bar, r, um, u1, vm, v1, q11, t, depth + 1);
}

}  // namespace

Vec3 field_of_segment(const WireSegment& seg, const Vec3& r, double mu0) {
  if (!r.allFinite() || !std::isfinite(seg.current))
    throw NumericalError("field_of_segment: non-finite input");
  if (seg.current == 0.0) return Vec3::Zero();

  Bar bar{seg.start, seg.direction(), seg.width_axis(), seg.height_axis(), seg.length()};
  const double hw = 0.5 * seg.width, hh = 0.5 * seg.height;
  const double area = seg.width * seg.height;

  // Tolerance relative to the thin-wire scale at this distance.
  const Vec3 ra = r - seg.start;
  const double dist = std::max((ra - ra.dot(bar.l) * bar.l).norm(), std::max(hw, hh));
  const double scale = 2.0 * area / dist;  // |kernel| ~ 2/rho times the area
  const double tol = 1e-11 * scale;

  const Vec3 coarse = cell_rule(bar, r, -hw, hw, -hh, hh);
  const Vec3 integral = adaptive(bar, r, -hw, hw, -hh, hh, coarse, tol, 0);
  return integral * (mu0 * seg.current / (4.0 * std::numbers::pi * area));
}

bool inside_conductor(const WireSegment& seg, const Vec3& r) {
  const Vec3 d = r - seg.start;
  const double s = d.dot(seg.direction());
  if (s < 0.0 || s > seg.length()) return false;
  return std::abs(d.dot(seg.width_axis())) <= 0.5 * seg.width &&
         std::abs(d.dot(seg.height_axis())) <= 0.5 * seg.height;
}

// ------------------------------------------------------------ static trap

StaticTrapModel StaticTrapModel::parametric(double B0, const Vec3& r_min, double f_axial, double f_radial,
                                            const PhysicalConstants& c) {
  if (!(B0 > 0.0 && f_axial > 0.0 && f_radial > 0.0))
    throw ConfigError("parametric trap: B0, f_axial and f_radial must be > 0");
  const double wx = units::two_pi * f_axial;
  const double wr = units::two_pi * f_radial;
  StaticTrapModel m;
  m.mode_ = TrapMode::parametric;
  m.B0_ = B0;
  m.r_min_ = r_min;
  m.b2_ = 2.0 * c.mass * wx * wx / c.mu_B;
  m.gradient_ = std::sqrt(B0 * (2.0 * c.mass * wr * wr / c.mu_B + 0.5 * m.b2_));
  m.mu0_ = c.mu0;
  return m;
}

StaticTrapModel StaticTrapModel::wires(std::vector<WireSegment> wires, const Vec3& bias, double mu0) {
  for (const auto& w : wires) w.validate();
  StaticTrapModel m;
  m.mode_ = TrapMode::wires;
  m.wires_ = std::move(wires);
  m.bias_ = bias;
  m.mu0_ = mu0;
  return m;
}

StaticTrapModel StaticTrapModel::from_config(const ExperimentConfig& cfg) {
  const auto& t = cfg.trap;
  if (t.mode == TrapMode::parametric) {
    auto model = parametric(t.B0, t.r_min, t.f_axial, t.f_radial, cfg.constants);
    model.bias_ = t.bias;
    return model;
  }
  auto model = wires(t.wires, t.bias, cfg.constants.mu0);
  model.r_min_ = t.r_min;
  model.B0_ = t.B0;
  return model;
}

Vec3 StaticTrapModel::field(const Vec3& r) const {
  if (mode_ == TrapMode::parametric) {
    const Vec3 d = r - r_min_;
    const double x = d.x(), y = d.y(), z = d.z();
    return bias_ + Vec3(B0_ + 0.5 * b2_ * (x * x - 0.5 * (y * y + z * z)),
                        gradient_ * y - 0.5 * b2_ * x * y,
                        -gradient_ * z - 0.5 * b2_ * x * z);
  }
  Vec3 B = bias_;
  for (const auto& w : wires_) B += field_of_segment(w, r, mu0_);
  return B;
}

// -------------------------------------------------------------------- CPW

CVec3 cpw_microwave_field(const CpwGeometry& geom, double I_mw, const Vec3& r, double mu0) {
  Vec3 B = Vec3::Zero();
  for (const auto& w : geom.wires(I_mw)) B += field_of_segment(w, r, mu0);
  return B.cast<Complex>();
}

double cpw_line_voltage(double P_mw, double impedance) {
  if (!(P_mw >= 0.0)) throw NumericalError("cpw_line_voltage: P_mw must be >= 0");
  return std::sqrt(2.0 * impedance * P_mw);
}

Vec3 cpw_electric_field(const CpwGeometry& geom, double P_mw, double impedance, const Vec3& r) {
  const double V = cpw_line_voltage(P_mw, impedance);
  if (V == 0.0) return Vec3::Zero();

  const double pitch = geom.ground_pitch();
  const double zc = -0.5 * geom.height;
  const std::array<double, 3> xs = {geom.signal_x, geom.signal_x - pitch, geom.signal_x + pitch};
  const std::array<double, 3> q = {1.0, -geom.a1, -geom.a2};
  const double r_eq = 0.25 * (geom.width + geom.height);

  // Potential per unit lambda / (2 pi eps0), in the x-z plane.
  auto potential = [&](double x, double z) {
    double phi = 0.0;
    for (int i = 0; i < 3; ++i) phi -= q[i] * 0.5 * std::log((x - xs[i]) * (x - xs[i]) + (z - zc) * (z - zc));
    return phi;
  };
  const double v_signal = potential(xs[0] + r_eq, zc);
  const double v_ground = geom.a1 * potential(xs[1] + r_eq, zc) + geom.a2 * potential(xs[2] - r_eq, zc);
  const double lambda_over_2pieps = V / (v_signal - v_ground);

  Vec3 E = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    const double dx = r.x() - xs[i], dz = r.z() - zc;
    const double d2 = dx * dx + dz * dz;
    E.x() += q[i] * dx / d2;
    E.z() += q[i] * dz / d2;
  }
  return E * lambda_over_2pieps;
}

}  // namespace chipdress
