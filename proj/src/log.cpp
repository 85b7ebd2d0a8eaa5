#include "aot/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace aot {

namespace {
LogLevel g_level = LogLevel::Info;

const char* tag(LogLevel level) {
    switch (level) {
        case LogLevel::Error: return "error";
        case LogLevel::Warn: return "warn";
        case LogLevel::Info: return "info";
        case LogLevel::Debug: return "debug";
    }
    return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void init_log_from_env() {
    const char* v = std::getenv("AOT_LOG");
    if (!v) return;
    if (!std::strcmp(v, "error")) g_level = LogLevel::Error;
    else if (!std::strcmp(v, "warn")) g_level = LogLevel::Warn;
    else if (!std::strcmp(v, "info")) g_level = LogLevel::Info;
    else if (!std::strcmp(v, "debug")) g_level = LogLevel::Debug;
}

void log_msg(LogLevel level, const char* fmt, ...) {
    if (static_cast<int>(level) > static_cast<int>(g_level)) return;
    std::fprintf(stderr, "[%s] ", tag(level));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace aot
