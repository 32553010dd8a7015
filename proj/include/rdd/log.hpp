#pragma once

#include <functional>
#include <string>

namespace rdd::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink (default: stderr, level >= info).
void set_sink(Sink sink);
// Restores the default stderr sink.
void reset_sink();
void set_level(Level level);
Level level();

void write(Level level, const std::string& message);
inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void error(const std::string& m) { write(Level::error, m); }

}  // namespace rdd::log
