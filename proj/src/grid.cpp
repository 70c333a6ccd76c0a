#include "chipdress/grid.hpp"

#include <cmath>
#include <string>

#include "chipdress/error.hpp"

namespace chipdress {

Grid3 Grid3::line(const Vec3& start, int axis, double step, int n) {
  if (axis < 0 || axis > 2) throw ConfigError("grid: axis must be 0, 1 or 2");
  Grid3 g;
  g.origin = start;
  g.spacing = Vec3::Constant(step);
  g.counts = {1, 1, 1};
  g.counts[static_cast<std::size_t>(axis)] = n;
  g.validate();
  return g;
}

void Grid3::validate() const {
  int sampled = 0;
  for (int a = 0; a < 3; ++a) {
    const int n = counts[static_cast<std::size_t>(a)];
    if (n < 1) throw ConfigError("grid: point count on axis " + std::to_string(a) + " must be >= 1");
    if (n >= 2) ++sampled;
    if (!(spacing(a) > 0.0) || !std::isfinite(spacing(a)))
      throw ConfigError("grid: spacing on axis " + std::to_string(a) + " must be > 0");
  }
  if (!origin.allFinite()) throw ConfigError("grid: origin must be finite");
  if (sampled == 0) throw ConfigError("grid: at least one axis needs >= 2 points");
}

}  // namespace chipdress
