#pragma once

#include <array>
#include <cstddef>

#include "chipdress/types.hpp"

namespace chipdress {

/// Regular axis-aligned sampling grid (SI internally). An axis with a single
/// point is not sampled; sampled axes need at least two points.
struct Grid3 {
  Vec3 origin = Vec3::Zero();
  Vec3 spacing = Vec3::Ones();
  std::array<int, 3> counts{1, 1, 1};

  std::size_t size() const {
    return static_cast<std::size_t>(counts[0]) * static_cast<std::size_t>(counts[1]) *
           static_cast<std::size_t>(counts[2]);
  }
  /// Flat index, x fastest.
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(counts[0]) * (static_cast<std::size_t>(j) +
                                                  static_cast<std::size_t>(counts[1]) * static_cast<std::size_t>(k));
  }
  Vec3 point(int i, int j, int k) const {
    return origin + Vec3(i * spacing.x(), j * spacing.y(), k * spacing.z());
  }

  /// Line of n points from `start` along unit axis `axis` (0, 1, 2).
  static Grid3 line(const Vec3& start, int axis, double step, int n);

  /// Throws ConfigError for non-positive spacing or counts < 1, or a grid
  /// without any sampled axis.
  void validate() const;
};

}  // namespace chipdress
