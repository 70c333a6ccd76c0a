#pragma once

#include <iostream>
#include <string_view>

namespace chipdress::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Threshold read once from CHIPDRESS_LOG (debug|info|warn|error|off);
/// defaults to warn.
Level threshold();

inline bool enabled(Level level) { return level >= threshold(); }

template <typename... Args>
void write(Level level, std::string_view tag, const Args&... args) {
  if (!enabled(level)) return;
  std::cerr << "[" << tag << "] ";
  (std::cerr << ... << args);
  std::cerr << '\n';
}

template <typename... Args> void debug(const Args&... a) { write(Level::debug, "D", a...); }
template <typename... Args> void info(const Args&... a) { write(Level::info, "I", a...); }
template <typename... Args> void warn(const Args&... a) { write(Level::warn, "W", a...); }

}  // namespace chipdress::log
