#include "porous/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace porous::log {

Level level() {
  static Level lvl = [] {
    const char* env = std::getenv("POROUS_LOG");
    if (env == nullptr) return Level::Info;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Info;
  }();
  return lvl;
}

static void emit(const char* tag, const std::string& msg) {
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

void error(const std::string& msg) { emit("error", msg); }

void info(const std::string& msg) {
  if (level() >= Level::Info) emit("info", msg);
}

void debug(const std::string& msg) {
  if (level() >= Level::Debug) emit("debug", msg);
}

} // namespace porous::log
