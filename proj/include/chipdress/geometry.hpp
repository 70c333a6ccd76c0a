#pragma once

#include <array>

#include "chipdress/types.hpp"

namespace chipdress {

enum class CurrentKind { steady, microwave };

/// Straight conductor with a rectangular cross-section and uniform current
/// density. The cross-section is centred on the start-end line; `normal`
/// fixes the direction of the `height` edge (the chip normal for planar
/// wires), the `width` edge is along direction x normal.
struct WireSegment {
  Vec3 start = Vec3::Zero();  // m
  Vec3 end = Vec3::UnitY();   // m
  double width = 1e-6;        // m
  double height = 1e-6;       // m
  double current = 0.0;       // A (amplitude for microwave currents)
  Vec3 normal = Vec3::UnitZ();
  CurrentKind kind = CurrentKind::steady;

  double length() const { return (end - start).norm(); }
  Vec3 direction() const { return (end - start) / length(); }
  /// Unit vector along the width edge.
  Vec3 width_axis() const;
  /// Unit vector along the height edge (normal orthogonalised to the axis).
  Vec3 height_axis() const;

  /// Throws ConfigError on zero length, non-positive cross-section or a
  /// normal parallel to the wire.
  void validate() const;
};

/// Coplanar waveguide: signal wire flanked by two ground wires, all running
/// along y in the chip plane. r = 0 is the top surface of the signal wire,
/// so the conductors occupy -height <= z <= 0.
///
/// Microwave currents: I_s = I_mw, I_g1 = -a1 I_mw (ground at -x),
/// I_g2 = -a2 I_mw (ground at +x), with a1 + a2 = 1.
struct CpwGeometry {
  double width = 6e-6;
  double height = 1e-6;
  double length = 2e-3;
  double signal_x = 0.0;
  double ground_gap = 3.7e-6;  // edge-to-edge
  double a1 = 0.5;
  double a2 = 0.5;

  double ground_pitch() const { return width + ground_gap; }

  /// Signal, ground 1 (-x), ground 2 (+x) carrying the partitioned current.
  std::array<WireSegment, 3> wires(double I_mw) const;

  bool symmetric() const { return a1 == a2; }

  void validate() const;
};

}  // namespace chipdress
