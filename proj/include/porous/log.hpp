#pragma once

#include <string>

namespace porous::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Reads POROUS_LOG once; defaults to Info on unknown/unset values.
Level level();

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

} // namespace porous::log
