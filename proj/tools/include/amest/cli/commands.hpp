#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amest/sim.hpp"

namespace amest::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailure = 1,
  kExitUsage = 2,
  kExitDivergence = 3,
};

/// Runs one scenario and writes run.csv, summary.txt, config.json,
/// tracking.svg and params.svg into out_dir.
int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);

/// Runs every scenario, writes one subdirectory per scenario plus
/// compare.csv (sorted by mean |m2_hat - m2|), estimates.svg and tracking.svg.
int cmd_compare(const std::vector<std::filesystem::path>& configs, const std::filesystem::path& out_dir,
                std::ostream& out, std::ostream& err);

struct ValidateArgs {
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  bool inject_coriolis_fault = false;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);

/// Human-readable run report; `failure` is set for a run that stopped early.
std::string summary_text(const Scenario& scenario, const SimLog& log, const RunSummary& summary,
                         const std::optional<std::string>& failure = std::nullopt);

/// Applies AMESTCTL_SEED when it is set. Throws ConfigError when it is not
/// a non-negative integer.
void apply_seed_override(Scenario& scenario);

/// Entry point behind the amestctl binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amest::cli
