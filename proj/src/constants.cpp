#include "chipdress/constants.hpp"

#include <cmath>
#include <string>

#include "chipdress/error.hpp"
#include "chipdress/log.hpp"

#include <cstdlib>
#include <string_view>

namespace chipdress {

namespace {

void require_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0))
    throw ConfigError(std::string("constants.") + name + " must be finite and > 0 (got " +
                      std::to_string(v) + ")");
}

// Zero switches the corresponding interaction off.
void require_non_negative(double v, const char* name) {
  if (!(std::isfinite(v) && v >= 0.0))
    throw ConfigError(std::string("constants.") + name + " must be finite and >= 0 (got " +
                      std::to_string(v) + ")");
}

}  // namespace

void PhysicalConstants::validate() const {
  require_positive(mu_B, "mu_B");
  require_positive(hbar, "hbar");
  require_positive(mass, "mass");
  require_positive(g_J, "g_J");
  require_positive(omega_hfs, "omega_hfs");
  require_positive(g_grav, "g_grav");
  require_positive(alpha0, "alpha0");
  require_positive(C4, "C4");
  require_non_negative(a00, "a00");
  require_non_negative(a11, "a11");
  require_non_negative(a01, "a01");
  require_positive(mu0, "mu0");
  require_positive(eps0, "eps0");
  if (!(std::isfinite(g_I) && g_I < 0.0))
    throw ConfigError("constants.g_I must be negative (got " + std::to_string(g_I) + ")");
}

namespace log {

Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("CHIPDRESS_LOG");
    if (!env) return Level::warn;
    std::string_view v(env);
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    if (v == "error") return Level::error;
    if (v == "off") return Level::off;
    return Level::warn;
  }();
  return level;
}

}  // namespace log

}  // namespace chipdress
