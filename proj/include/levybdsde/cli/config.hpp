#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "levybdsde/bdsde_solver.hpp"
#include "levybdsde/levy_model.hpp"

namespace levybdsde::cli {

using nlohmann::json;

// Builtin function selected by name with numeric parameters.
struct FunctionSpec {
  std::string type;
  std::map<std::string, double> params;

  double param(const std::string& name) const { return params.at(name); }
};

struct ModelSettings {
  double drift = 0.0;
  double kappa = 0.0;
  std::vector<Atom> atoms;
  double exp_moment_lambda = 1.0;

  LevyModel build() const { return LevyModel(drift, kappa, atoms, exp_moment_lambda); }
};

struct BasisSettings {
  int order = 2;
  double pivot_tol = 1e-12;
};

struct ProblemSettings {
  double t0 = 0.0;
  double horizon = 1.0;
  double x0 = 0.0;
  FunctionSpec sigma{"constant", {{"value", 1.0}}};
  FunctionSpec terminal;
  FunctionSpec f{"zero", {}};
  FunctionSpec g{"zero", {}};
  FunctionSpec phi{"zero", {}};
  double lipschitz_f = 0.0;
  double lipschitz_g = 0.0;
  double alpha_g = 0.0;
  // mspdie evaluation point and optional sweep over x.
  double t = 0.0;
  double x = 0.0;
  std::vector<double> x_sweep;
};

struct SimulateSettings {
  std::size_t n_paths = 1000;
  std::size_t n_steps = 100;
  double horizon = 1.0;
};

struct ProxCheckSettings {
  FunctionSpec phi{"zero", {}};
  std::vector<double> eps{0.1};
  std::size_t samples = 10000;
  double x_min = -3.0;
  double x_max = 3.0;
  std::size_t x_points = 61;
};

struct FlowCheckSettings {
  double t = 0.0;
  double x = 0.0;
  std::vector<double> dx;
  std::vector<double> dt;
  std::size_t n_paths = 10000;
  std::size_t n_steps = 64;
};

struct OutputSettings {
  std::string dir = "out";
  std::size_t max_paths = 10;
};

// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::string> command;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
};

struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  ModelSettings model;
  BasisSettings basis;
  ProblemSettings problem;
  SolverConfig solver;
  std::vector<double> eps_ladder;
  SimulateSettings simulate;
  ProxCheckSettings prox_check;
  FlowCheckSettings flow_check;
  OutputSettings output;
  // Every setting with defaults filled in, as echoed next to the results.
  json resolved;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "teugels", "prox-check", "solve",
                                              "converge", "mspdie", "flow-check"};
  return names;
}

// Parses and validates the JSON text. Errors are ConfigError with a
// "line N: section.field: ..." or "section.field: ..." message.
ExperimentConfig parse_config(const std::string& text, const Overrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const Overrides& overrides = {});

}  // namespace levybdsde::cli
