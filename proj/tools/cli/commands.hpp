#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace rapm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitRuntime = 3,
};

struct Options {
  std::optional<std::filesystem::path> output_dir;
  /// Replaces both the run seed and the problem seed.
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void apply_overrides(RunConfig& c, const Options& o);

int cmd_validate(const RunConfig& c, std::ostream& out);
int cmd_solve(const RunConfig& c, std::ostream& out, bool quiet);
int cmd_certify(const RunConfig& c, std::ostream& out, bool quiet);
int cmd_compare(const RunConfig& c, std::ostream& out, bool quiet);

/// Loads the config, applies overrides and dispatches `command`, mapping
/// errors onto exit codes: config problems to 2, runtime failures to 3.
int run_command(const std::string& command, const std::filesystem::path& config,
                const Options& options, std::ostream& out, std::ostream& err);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kNotReached = "not_reached";

}  // namespace rapm::cli
