#pragma once

#include <iosfwd>
#include <string>

#include "levybdsde/cli/config.hpp"

namespace levybdsde::cli {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

// Executes the configured command and writes its files under the output
// directory. Throws the library errors; run_main maps them to exit codes.
void run(const ExperimentConfig& config, std::ostream& log);

int run_main(const std::string& config_path, const Overrides& overrides, std::ostream& log,
             std::ostream& err);

}  // namespace levybdsde::cli
