#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "rpl/config.hpp"
#include "rpl/harness.hpp"
#include "rpl/report.hpp"

namespace rpl {

// Exit codes of the command line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitPrecondition = 2;

// Runs the configured chain on the configured grid.
ChainReport run_chain(const ExperimentConfig& config);

// Per-level comparison of mu{f > lambda} and alpha{f* > lambda}.
ChainReport equimeasurability_report(const GridFunction& f, const RearrangedFunction& star,
                                     const RearrangementSpec& spec, const ToleranceModel& tolerance);

ConvergenceReport run_convergence(const ExperimentConfig& config);

// Profile CSV with the configured columns; 1-D grids only.
std::string profile_csv(const ExperimentConfig& config);

int cmd_rearrange(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
int cmd_chain(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
int cmd_convergence(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
int cmd_profile(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);

struct CommandLine {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> resolution_override;
};

// Loads the config, applies overrides, runs the command and maps errors to
// exit codes; diagnostics go to `err`.
int run_command(const CommandLine& cl, std::ostream& log, std::ostream& err);

}  // namespace rpl
