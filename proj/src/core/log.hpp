#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>

namespace texsplat {

// Verbosity from TEXSPLAT_LOG: 0 quiet, 1 info (default), 2 debug.
inline int log_level() {
    static int level = [] {
        const char* env = std::getenv("TEXSPLAT_LOG");
        return env != nullptr ? std::atoi(env) : 1;
    }();
    return level;
}

inline void log_info(const char* fmt, ...) {
    if (log_level() < 1) return;
    va_list args;
    va_start(args, fmt);
    std::fprintf(stderr, "[texsplat] ");
    std::vfprintf(stderr, fmt, args);
    std::fprintf(stderr, "\n");
    va_end(args);
}

inline void log_debug(const char* fmt, ...) {
    if (log_level() < 2) return;
    va_list args;
    va_start(args, fmt);
    std::fprintf(stderr, "[texsplat] ");
    std::vfprintf(stderr, fmt, args);
    std::fprintf(stderr, "\n");
    va_end(args);
}

} // namespace texsplat
