#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace ssdm {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from SSD_LOG_LEVEL (error|warn|info|debug); default info.
inline LogLevel log_level() {
    static LogLevel lv = [] {
        const char* env = std::getenv("SSD_LOG_LEVEL");
        if (!env) return LogLevel::info;
        if (!std::strcmp(env, "error")) return LogLevel::error;
        if (!std::strcmp(env, "warn")) return LogLevel::warn;
        if (!std::strcmp(env, "debug")) return LogLevel::debug;
        return LogLevel::info;
    }();
    return lv;
}

inline void log_msg(LogLevel lv, const std::string& msg) {
    if (lv > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lv)], msg.c_str());
}

inline void log_error(const std::string& m) { log_msg(LogLevel::error, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::debug, m); }

}  // namespace ssdm
