#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace prism {

enum class LogLevel { Debug, Info, Warn, Error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink (default writes to stderr). Passing an
/// empty function restores the default. Thread-safe.
void set_log_sink(LogSink sink);

void log(LogLevel level, const std::string& message);

inline void log_info(const std::string& message) { log(LogLevel::Info, message); }
inline void log_warn(const std::string& message) { log(LogLevel::Warn, message); }

}  // namespace prism
