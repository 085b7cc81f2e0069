#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace fdqn {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Verbosity from FDQN_LOG_LEVEL in {error, info, debug}; default info.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* v = std::getenv("FDQN_LOG_LEVEL");
        if (!v) return LogLevel::Info;
        const std::string s(v);
        if (s == "error") return LogLevel::Error;
        if (s == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

inline void log_error(const std::string& msg) { std::fprintf(stderr, "error: %s\n", msg.c_str()); }

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "%s\n", msg.c_str());
}

}  // namespace fdqn
