#include "edr/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace edr::log {

namespace {

Level from_env() {
  const char* v = std::getenv("EDR_LOG");
  return v ? parse_level(v) : Level::warn;
}

std::atomic<int>& current() {
  static std::atomic<int> l{static_cast<int>(from_env())};
  return l;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level parse_level(std::string_view name) {
  if (name == "error") return Level::error;
  if (name == "info") return Level::info;
  if (name == "debug") return Level::debug;
  return Level::warn;
}

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level l) { current().store(static_cast<int>(l)); }

void write(Level l, std::string_view msg) {
  if (static_cast<int>(l) > current().load()) return;
  static constexpr const char* tags[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[edr " << tags[static_cast<int>(l)] << "] " << msg << '\n';
}

}  // namespace edr::log
