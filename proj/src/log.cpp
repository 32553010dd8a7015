#include "rdd/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace rdd::log {

namespace {

const char* tag(Level l) {
    switch (l) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        case Level::off: break;
    }
    return "";
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

void stderr_sink(Level l, const std::string& msg) { std::cerr << "[" << tag(l) << "] " << msg << '\n'; }

Sink& current_sink() {
    static Sink s = stderr_sink;
    return s;
}

std::atomic<Level>& current_level() {
    static std::atomic<Level> l{Level::info};
    return l;
}

}  // namespace

void set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex());
    current_sink() = std::move(sink);
}

void reset_sink() { set_sink(stderr_sink); }

void set_level(Level level) { current_level().store(level); }

Level level() { return current_level().load(); }

void write(Level l, const std::string& message) {
    if (l < current_level().load()) return;
    std::lock_guard lock(sink_mutex());
    if (current_sink()) current_sink()(l, message);
}

}  // namespace rdd::log
