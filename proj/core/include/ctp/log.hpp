#pragma once

#include <string_view>

namespace ctp::log {

enum class Level { Debug, Info, Warn, Error, Off };

void set_level(Level level) noexcept;
Level level() noexcept;

/// Writes "[ctp] <level>: <message>" to stderr when `lvl` is enabled.
void write(Level lvl, std::string_view message);

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace ctp::log
