#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpl/convexsets.hpp"
#include "rpl/family.hpp"
#include "rpl/grid.hpp"
#include "rpl/harness.hpp"
#include "rpl/means.hpp"
#include "rpl/rearrange.hpp"

namespace rpl {

struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> n;

  Grid build() const;
};

struct FunctionConfig {
  FamilySpec family;
  // Random families use the experiment seed plus this offset; it defaults to
  // the function's position in the list.
  std::uint64_t seed_offset = 0;
};

struct ChainConfig {
  std::string kind;
  double t = 0.5;
  ExtendedReal p = ExtendedReal::finite(0.0);
  double lambda = 0.5;
  std::vector<double> weights;
  std::optional<std::vector<std::size_t>> concave;  // absent: every index
  std::vector<double> levels;
  double radius = 1.0;
  PsiTransform psi = Identity{};
};

struct ConvergenceConfig {
  std::vector<int> resolutions;
  std::vector<std::optional<double>> limits;
  double required_ratio = 1.7;
};

struct ProfileConfig {
  std::vector<std::string> columns{"x", "f", "fstar"};
  double lambda = 0.5;
};

struct ExperimentConfig {
  GridSpec grid;
  std::optional<GridSpec> target_grid;
  MeasureSpec measure;
  std::vector<FunctionConfig> functions;
  RearrangementKind rearrangement = RearrangementKind::ConvexBody;
  std::optional<ConvexBody> body;  // defaults to the unit ball
  LadderStrategy ladder = AllValues{};
  SupconvMethod method = SupconvMethod::Auto;
  ChainConfig chain;
  ToleranceModel tolerance;
  std::uint64_t seed = 0;
  ConvergenceConfig convergence;
  ProfileConfig profile;
};

// Throws ConfigError naming the offending field, or the line and column for
// syntax errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

void apply_resolution(ExperimentConfig& config, int n);

Grid source_grid(const ExperimentConfig& config);
// The target grid, defaulting to the source grid for convex-body runs and
// to [-8, 8] at the source's first-axis resolution for half-space runs.
Grid target_grid(const ExperimentConfig& config);
RearrangementSpec rearrangement_spec(const ExperimentConfig& config);
std::vector<GridFunction> build_functions(const ExperimentConfig& config);
ChainOptions chain_options(const ExperimentConfig& config);

}  // namespace rpl
