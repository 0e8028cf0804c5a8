#include <iostream>
#include <utility>

#include "CLI11.hpp"
#include "cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rapm: regularized accelerated proximal method for simple bilevel problems"};
  app.require_subcommand(1);

  rapm::cli::Options options;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string config;

  bool have_dir = false;
  bool have_seed = false;
  const std::pair<const char*, const char*> commands[] = {
      {"validate", "Check convexity, Lipschitz constants and ground truth of the problem"},
      {"solve", "Run every configured solver, write trace CSVs and manifest.json"},
      {"certify", "Check the convergence inequalities along R-APM runs"},
      {"compare", "Run all solvers from a shared start and write summary.csv"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Path to the JSON run config")->required();
    sub->add_option("--output-dir", output_dir, "Override the output directory")
        ->each([&](const std::string&) { have_dir = true; });
    sub->add_option("--seed", seed, "Override the run and problem seeds")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_flag("--quiet", options.quiet, "Only print errors and check tables");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rapm::cli::kExitUsage;
  }
  if (have_dir) options.output_dir = output_dir;
  if (have_seed) options.seed = seed;

  const std::string command = app.get_subcommands().front()->get_name();
  return rapm::cli::run_command(command, config, options, std::cout, std::cerr);
}
