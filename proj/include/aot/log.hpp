#pragma once

#include <cstdarg>

namespace aot {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
// Reads AOT_LOG (error|warn|info|debug) if set; otherwise keeps the default (info).
void init_log_from_env();

void log_msg(LogLevel level, const char* fmt, ...);

#define AOT_LOG_ERROR(...) ::aot::log_msg(::aot::LogLevel::Error, __VA_ARGS__)
#define AOT_LOG_WARN(...) ::aot::log_msg(::aot::LogLevel::Warn, __VA_ARGS__)
#define AOT_LOG_INFO(...) ::aot::log_msg(::aot::LogLevel::Info, __VA_ARGS__)
#define AOT_LOG_DEBUG(...) ::aot::log_msg(::aot::LogLevel::Debug, __VA_ARGS__)

}  // namespace aot
