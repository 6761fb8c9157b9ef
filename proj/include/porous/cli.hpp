#pragma once

#include "porous/config.hpp"
#include "porous/stepper.hpp"

#include <iosfwd>
#include <string>

namespace porous::cli {

// Exit-code contract shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1; // solver / numerical / I/O failure
constexpr int kExitAudit = 2;   // run completed but an invariant audit failed
constexpr int kExitUsage = 64;  // bad command line or bad configuration

enum class CheckMode { Off, Report, Strict };

CheckMode parse_check_mode(const std::string& text); // throws ConfigError

struct RunOptions {
  std::string out_dir;     // empty: [output] dir, default "out"
  int snapshot_every = -1; // < 0: [output] snapshot_every, default 0 (ends only)
  CheckMode check = CheckMode::Report;
};

/// Builds a ready-to-step scenario from the [mesh], [coefficients], [time],
/// [boundary], [initial] and [solver] sections. Throws ConfigError (or a
/// more specific parse error) on any defect, always naming the offending key.
Scenario build_scenario(const Config& cfg);

int cmd_run(const Config& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_mms(const Config& cfg, std::ostream& out, std::ostream& err);
int cmd_oracle(const Config& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const Config& cfg, std::ostream& out, std::ostream& err);

/// Full argv-level entry point (subcommand dispatch, config loading, exit
/// codes). Factored out of main() so tests can drive it in-process.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace porous::cli
