#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tecoord::cli {

// Exit codes.  Validation problems and violated solver hypotheses map to
// kExitInvalid; a solver that runs out of iterations maps to kExitNotConverged.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitPropertyViolated = 4;

struct RunResult {
  int exit_code = kExitOk;
  std::optional<nlohmann::json> report;
  std::string message;  // usage text, help, or "Code: reason" diagnostic
  bool quiet = false;
  bool report_written = false;  // report went to --out
};

/// Parses args (args[0] is the program name), runs the subcommand and writes
/// the report and any CSV sidecars named by --out / --trace.  Nothing is
/// printed; the caller decides what to show.
RunResult parse_and_dispatch(const std::vector<std::string>& args);

/// Report text exactly as written to --out or stdout.
std::string render(const nlohmann::json& report);

/// parse_and_dispatch plus console output, for main().
int run(int argc, char** argv);

}  // namespace tecoord::cli
