#pragma once

#include <array>
#include <vector>

#include "chipdress/config.hpp"
#include "chipdress/constants.hpp"
#include "chipdress/geometry.hpp"
#include "chipdress/types.hpp"

namespace chipdress {

/// Static field B(r), microwave amplitude B_mw(r) and electric amplitude E(r)
/// at one point, SI units.
struct FieldSample {
  Vec3 B = Vec3::Zero();
  CVec3 B_mw = CVec3::Zero();
  Vec3 E = Vec3::Zero();
};

/// Field (T) of a uniform-current rectangular bar at r. The length direction
/// is integrated analytically (finite filament), the cross-section by
/// adaptive tensor Gauss-Legendre quadrature.
Vec3 field_of_segment(const WireSegment& seg, const Vec3& r, double mu0 = PhysicalConstants{}.mu0);

/// True when r lies inside the conductor volume. field_of_segment still
/// returns the quadrature result there.
bool inside_conductor(const WireSegment& seg, const Vec3& r);

/// Static trapping field: either a parametric Ioffe-Pritchard field with its
/// axis along x, or a superposition of wire fields; the uniform `bias` of the
/// config is added in both modes.
///
/// The parametric field is the divergence- and curl-free form
///   B = B0 x + B'(0, y, -z) + (b2/2)(x^2 - (y^2+z^2)/2, -x y, -x z)
/// in coordinates relative to the trap minimum, with
///   b2 = 2 m w_x^2 / mu_B,  B'^2 = B0 (2 m w_perp^2 / mu_B + b2/2)
/// so that mu_B |B| / 2 has exactly the requested curvatures at r_min.
class StaticTrapModel {
 public:
  static StaticTrapModel parametric(double B0, const Vec3& r_min, double f_axial, double f_radial,
                                    const PhysicalConstants& c);
  static StaticTrapModel wires(std::vector<WireSegment> wires, const Vec3& bias, double mu0);
  static StaticTrapModel from_config(const ExperimentConfig& cfg);

  Vec3 field(const Vec3& r) const;

  TrapMode mode() const { return mode_; }
  double B0() const { return B0_; }
  const Vec3& r_min() const { return r_min_; }
  double curvature() const { return b2_; }
  double gradient() const { return gradient_; }
  const std::vector<WireSegment>& wire_list() const { return wires_; }

 private:
  TrapMode mode_ = TrapMode::parametric;
  double B0_ = 0.0;
  Vec3 r_min_ = Vec3::Zero();
  double b2_ = 0.0;
  double gradient_ = 0.0;
  std::vector<WireSegment> wires_;
  Vec3 bias_ = Vec3::Zero();
  double mu0_ = PhysicalConstants{}.mu0;
};

inline Vec3 static_field(const StaticTrapModel& model, const Vec3& r) { return model.field(r); }

/// Quasi-static microwave amplitude of the CPW mode for signal current I_mw.
/// All currents are in phase, so the result is real times a global phase.
CVec3 cpw_microwave_field(const CpwGeometry& geom, double I_mw, const Vec3& r,
                          double mu0 = PhysicalConstants{}.mu0);

/// Line voltage amplitude sqrt(2 Z0 P) of a matched line.
double cpw_line_voltage(double P_mw, double impedance);

/// Electric amplitude (V/m) from a 2D line-charge model of the CPW: charges
/// lambda, -a1 lambda, -a2 lambda on the wire axes, lambda fixed by the
/// signal-to-ground voltage at the equivalent radius (w + h)/4.
Vec3 cpw_electric_field(const CpwGeometry& geom, double P_mw, double impedance, const Vec3& r);

}  // namespace chipdress
