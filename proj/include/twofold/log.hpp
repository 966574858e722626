#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace twofold {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("TWOFOLD_LAB_LOG");
    if (e == nullptr) return LogLevel::Info;
    if (std::strcmp(e, "error") == 0) return LogLevel::Error;
    if (std::strcmp(e, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return lvl;
}

inline void log_at(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  const char* tag = lvl == LogLevel::Error ? "error" : (lvl == LogLevel::Info ? "info" : "debug");
  std::fprintf(stderr, "twofold-lab %s: %s\n", tag, msg.c_str());
}

inline void log_error(const std::string& msg) { log_at(LogLevel::Error, msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_at(LogLevel::Debug, msg); }

}  // namespace twofold
