#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "rpl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rearrangement inequality laboratory"};
  app.require_subcommand(1, 1);
  rpl::CommandLine cl;
  std::uint64_t seed = 0;
  int resolution = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"rearrange", "Rearrange the first function and report equimeasurability"},
      {"chain", "Run the configured inequality chain"},
      {"convergence", "Run the chain at doubling resolutions and check the rates"},
      {"profile", "Write plot-ready columns of a 1-D experiment"},
  };
  for (auto [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", cl.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", cl.out, "Output directory");
    sub->add_option("--seed-override", seed, "Replace the experiment seed");
    sub->add_option("--resolution-override", resolution, "Cells per axis for every grid")->check(CLI::Range(2, 1 << 20));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : rpl::kExitPrecondition;
  }
  CLI::App* sub = app.get_subcommands().front();
  cl.command = sub->get_name();
  if (sub->count("--seed-override")) cl.seed_override = seed;
  if (sub->count("--resolution-override")) cl.resolution_override = resolution;
  return rpl::run_command(cl, std::cout, std::cerr);
}
