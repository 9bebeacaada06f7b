#pragma once

#include <string>

namespace ledtree::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Current level, read once from the LEDTREE_LOG environment variable
/// (error | info | debug); defaults to error.
Level level();

void write(Level lvl, const std::string& msg);

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace ledtree::log
