#include "opph/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace opph {

namespace {

std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_mutex;

const char* label(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warning: return "warning";
    case LogLevel::error: return "error";
    default: return "";
  }
}

}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log(LogLevel level, std::string_view message) {
  if (level < g_level.load() || level == LogLevel::off) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[opph " << label(level) << "] " << message << '\n';
}

}  // namespace opph
