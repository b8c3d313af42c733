#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace rescast {

/// Verbosity from RESCAST_LOG: quiet | info (default) | debug.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("RESCAST_LOG");
        if (env == nullptr) return LogLevel::info;
        if (std::strcmp(env, "quiet") == 0) return LogLevel::quiet;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::fprintf(stderr, "[rescast] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::fprintf(stderr, "[rescast] %s\n", msg.c_str());
}

}  // namespace rescast
