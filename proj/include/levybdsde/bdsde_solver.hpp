#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "levybdsde/convex.hpp"
#include "levybdsde/levy_model.hpp"
#include "levybdsde/teugels.hpp"

namespace levybdsde {

// Realised Levy path as seen by the terminal functional: forward states
// X_0..X_N and the increments dL_0..dL_{N-1}.
struct PathView {
  std::span<const double> state;
  std::span<const double> dL;
};

using TerminalFn = std::function<double(const PathView&)>;
// (t, x, y, z) -> value. x is the forward state (ignored by path-level problems).
using DriverFn = std::function<double(double, double, double, std::span<const double>)>;
using ScalarFn = std::function<double(double)>;

// Forward state X_{k+1} = X_k + sigma(X_k) dC_k + jumps applied one at a time
// with sigma at the pre-jump state. The default (x0 = 0, sigma = 1) gives X = L.
struct ForwardSpec {
  double x0 = 0.0;
  ScalarFn sigma;  // empty means sigma = 1

  double sigma_at(double x) const { return sigma ? sigma(x) : 1.0; }
  double advance(double x, double continuous, std::span<const Jump> jumps) const;
  double advance(double x, double continuous, std::span<const double> jump_sizes) const;
};

struct BdsdeProblem {
  BdsdeProblem(LevyModel model, TeugelsBasis basis, TerminalFn terminal);

  LevyModel model;
  TeugelsBasis basis;
  double t0 = 0.0;
  double horizon = 1.0;
  TerminalFn terminal;
  DriverFn f;  // empty means f = 0
  DriverFn g;  // empty means g = 0
  ConvexFunction phi = ConvexFunction::zero();
  ForwardSpec forward;

  // User-supplied Lipschitz data: |g(y1,z1)-g(y2,z2)|^2 <= C|dy|^2 + alpha |dz|^2.
  double lipschitz_f = 0.0;
  double lipschitz_g = 0.0;
  double alpha_g = 0.0;

  void validate() const;
};

enum class CeMethod { tree, regression };
enum class StepMode { implicit_prox, explicit_step };

struct SolverConfig {
  std::size_t n_steps = 100;
  double eps = 0.1;
  std::size_t n_inner = 1000;
  std::size_t n_outer = 1;
  CeMethod ce_method = CeMethod::regression;
  int degree = 3;
  StepMode step_mode = StepMode::implicit_prox;
  std::uint64_t seed = 1;
  // Seed of the Brownian scenarios; defaults to `seed`.
  std::optional<std::uint64_t> brownian_seed;
  unsigned workers = 1;
  // Tree method: at most this many jumps per step, Gauss-Hermite nodes for
  // the Gaussian part, and a cap on the number of stored tree nodes.
  int tree_max_jumps = 3;
  int tree_gauss_nodes = 3;
  std::size_t max_tree_nodes = 4'000'000;
  // One extra pass re-evaluating f and g at the solved Y_k.
  bool picard_refinement = false;

  void validate() const;
};

// Estimate with Monte Carlo standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct AprioriReport {
  double eps = 0.0;
  Estimate sup_y_squared;       // E sup_k |Y_k|^2
  Estimate z_energy;            // E sum_k |Z_k|^2 dt
  Estimate u_energy;            // E sum_k |U_k|^2 dt
  Estimate phi_of_resolvent;    // sup_k E phi(J_eps(Y_k))
  Estimate resolvent_gap;       // sup_k E |Y_k - J_eps(Y_k)|^2
  bool finite = true;
};

// Results for one frozen Brownian scenario. Trajectories are indexed by inner
// Levy sample j; Y and U hold N+1 nodes, Z holds N nodes of `rank` entries.
struct ScenarioResult {
  std::vector<double> dB;
  std::size_t n_inner = 0;
  std::vector<double> Y;
  std::vector<double> U;
  std::vector<double> Z;
  double y0 = 0.0;
  // Standard error of y0 from the inner Levy samples (0 for the tree method).
  double y0_std_error = 0.0;
};

struct BdsdeSolution {
  TimeGrid grid;
  int rank = 0;
  double eps = 0.0;
  ConvexFunction phi = ConvexFunction::zero();
  std::vector<ScenarioResult> scenarios{};
  // Probability mass dropped by the tree's per-step jump truncation.
  double truncated_mass = 0.0;
  AprioriReport diagnostics{};

  std::size_t n_steps() const noexcept { return grid.n_steps; }
  double Y(std::size_t s, std::size_t j, std::size_t k) const;
  double U(std::size_t s, std::size_t j, std::size_t k) const;
  double Z(std::size_t s, std::size_t j, std::size_t k, int i) const;

  // Mean of Y_0 over Brownian scenarios with its standard error.
  Estimate y0() const;
};

// One backward step of the penalised scheme: solves y + (dt/eps)(y - J_eps(y)) = rhs.
double implicit_prox_step(const ConvexFunction& phi, double eps, double dt, double rhs);

BdsdeSolution solve_penalized(const BdsdeProblem& problem, const SolverConfig& config);

struct CauchyRow {
  double eps = 0.0;
  double delta = 0.0;
  double gap = 0.0;
  double gap_std_error = 0.0;
  double ratio = 0.0;  // gap / (eps + delta)
};

struct CauchyReport {
  std::vector<CauchyRow> rows;
  // Least-squares slope of log gap against log eps (NaN with < 2 positive gaps).
  double slope = 0.0;
  // Constant fitted on the first ladder level: gap <= c3 (eps + delta).
  double c3 = 0.0;
  // Every later level satisfies the first level's bound (with 3 s.e. slack).
  bool envelope_holds = true;
  std::vector<AprioriReport> apriori;
};

struct LimitResult {
  BdsdeSolution solution;  // finest eps
  CauchyReport report;
};

// D(eps, delta) = E[sup_k |Y^eps_k - Y^delta_k|^2 + sum_k |Z^eps_k - Z^delta_k|^2 dt].
Estimate cauchy_gap(const BdsdeSolution& a, const BdsdeSolution& b);

LimitResult solve_limit(const BdsdeProblem& problem, const SolverConfig& config,
                        std::span<const double> eps_ladder);

AprioriReport check_apriori(const BdsdeSolution& solution);

// True when E|Y - J_eps Y|^2 / eps^2 grows like a negative power of eps along
// the ladder (fitted log-log slope below -0.5), i.e. the eps^2 scaling fails.
bool resolvent_gap_scaling_violated(std::span<const AprioriReport> ladder);

}  // namespace levybdsde
