#include "ledtree/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ledtree::log {

static Level parse_env() {
  const char* env = std::getenv("LEDTREE_LOG");
  if (!env) return Level::Error;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  if (std::strcmp(env, "info") == 0) return Level::Info;
  return Level::Error;
}

Level level() {
  static Level lvl = parse_env();
  return lvl;
}

void write(Level lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  const char* tag = lvl == Level::Error ? "error" : (lvl == Level::Info ? "info" : "debug");
  std::fprintf(stderr, "[ledtree %s] %s\n", tag, msg.c_str());
}

}  // namespace ledtree::log
