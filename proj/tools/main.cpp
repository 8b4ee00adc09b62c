#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "levybdsde/cli/runner.hpp"

int main(int argc, char** argv) {
  namespace cli = levybdsde::cli;
  CLI::App app{"Penalised BDSDE experiments driven by a JSON config"};
  std::string config_path;
  std::string command;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;

  std::string commands;
  for (const auto& c : cli::command_names()) commands += (commands.empty() ? "" : ", ") + c;
  app.add_option("command", command, "Command to run (" + commands + "); must match the config if both are given");
  app.add_option("--config", config_path, "Path to the JSON config")->required();
  app.add_option("--seed", seed, "Seed overriding the config");
  app.add_option("--workers", workers, "Worker threads overriding the config")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory overriding the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  cli::Overrides overrides;
  if (!command.empty()) overrides.command = command;
  overrides.seed = seed;
  overrides.workers = workers;
  overrides.out_dir = out_dir;
  return cli::run_main(config_path, overrides, std::cout, std::cerr);
}
