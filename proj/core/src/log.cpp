#include "ctp/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace ctp::log {
namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;

const char* name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) noexcept { g_level.store(level); }
Level level() noexcept { return g_level.load(); }

void write(Level lvl, std::string_view message) {
  if (lvl < g_level.load() || lvl == Level::Off) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[ctp] " << name(lvl) << ": " << message << '\n';
}

}  // namespace ctp::log
