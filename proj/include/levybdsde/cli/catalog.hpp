#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levybdsde/bdsde_solver.hpp"
#include "levybdsde/cli/config.hpp"
#include "levybdsde/convex.hpp"
#include "levybdsde/mspdie.hpp"

namespace levybdsde::cli {

enum class FunctionKind { sigma, driver, noise, terminal, phi };

struct CatalogEntry {
  std::string type;
  // Parameter names with defaults; nullopt marks a required parameter.
  std::vector<std::pair<std::string, std::optional<double>>> params;
  std::string description;
};

const std::vector<CatalogEntry>& catalog(FunctionKind kind);
std::string kind_name(FunctionKind kind);

ScalarFn make_sigma(const FunctionSpec& spec);
DriverFn make_driver(const FunctionSpec& spec);
NoiseFn make_noise(const FunctionSpec& spec);
ScalarFn make_terminal(const FunctionSpec& spec);
ConvexFunction make_phi(const FunctionSpec& spec);

}  // namespace levybdsde::cli
