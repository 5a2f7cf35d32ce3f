#pragma once

// Minimal leveled logging to stderr. The level comes from EDR_LOG
// (error, warn, info, debug; default warn) unless set explicitly.

#include <string_view>

namespace edr::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level level();
void set_level(Level l);
/// Parses a level name; unknown names give warn.
Level parse_level(std::string_view name);

void write(Level l, std::string_view msg);
inline void error(std::string_view m) { write(Level::error, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

}  // namespace edr::log
