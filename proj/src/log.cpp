#include "prism/log.hpp"

#include <iostream>
#include <mutex>

namespace prism {

namespace {

std::mutex g_sink_mutex;
LogSink g_sink;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
    }
    return "?";
}

}  // namespace

void set_log_sink(LogSink sink) {
    std::lock_guard lock(g_sink_mutex);
    g_sink = std::move(sink);
}

void log(LogLevel level, const std::string& message) {
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) {
        g_sink(level, message);
    } else {
        std::cerr << "[prism:" << level_name(level) << "] " << message << "\n";
    }
}

}  // namespace prism
