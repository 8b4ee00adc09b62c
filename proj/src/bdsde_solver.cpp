#include "levybdsde/bdsde_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "levybdsde/errors.hpp"
#include "levybdsde/parallel.hpp"
#include "levybdsde/random.hpp"
#include "levybdsde/regression.hpp"

namespace levybdsde {

namespace {

Estimate mean_and_error(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  if (v.empty()) return {};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// One time-homogeneous outcome of the Levy noise over a step, used by the tree.
struct StepOutcome {
  double prob = 0.0;
  double dC = 0.0;
  std::vector<double> jumps;
  double dL = 0.0;
  std::vector<double> dH;
};

// Probabilists' Gauss-Hermite rule via Golub-Welsch: nodes z and weights w
// with sum_i w_i h(z_i) = E[h(N(0,1))] for polynomials of degree < 2m.
void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes.resize(m);
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    weights[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  }
}

std::vector<StepOutcome> enumerate_outcomes(const BdsdeProblem& problem, const SolverConfig& config,
                                            double dt, double& truncated_mass) {
  const auto& model = problem.model;
  const auto atoms = model.atoms();
  const int r = problem.basis.rank();

  std::vector<double> z_nodes{0.0}, z_weights{1.0};
  if (model.kappa() > 0.0) gauss_hermite(config.tree_gauss_nodes, z_nodes, z_weights);

  // Jump-count vectors with total count <= tree_max_jumps.
  std::vector<std::vector<int>> counts;
  std::vector<int> current(atoms.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t a, int remaining) {
    if (a == atoms.size()) {
      counts.push_back(current);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      current[a] = c;
      rec(a + 1, remaining - c);
    }
    current[a] = 0;
  };
  rec(0, config.tree_max_jumps);

  std::vector<double> compensator(r);
  for (int m = 1; m <= r; ++m) compensator[m - 1] = power_jump_mean(model, m) * dt;

  std::vector<StepOutcome> out;
  double total = 0.0;
  for (const auto& cv : counts) {
    double p = 1.0;
    std::vector<double> sizes;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const double rate = atoms[a].intensity * dt;
      p *= std::exp(-rate + cv[a] * std::log(rate) - std::lgamma(cv[a] + 1.0));
      for (int c = 0; c < cv[a]; ++c) sizes.push_back(atoms[a].size);
    }
    for (std::size_t zi = 0; zi < z_nodes.size(); ++zi) {
      StepOutcome o;
      o.prob = p * z_weights[zi];
      o.dC = model.continuous_drift() * dt + model.kappa() * std::sqrt(dt) * z_nodes[zi];
      o.jumps = sizes;
      o.dL = o.dC;
      for (double s : sizes) o.dL += s;
      std::vector<double> power(r);
      if (r > 0) power[0] = o.dL;
      for (int m = 2; m <= r; ++m) {
        double s = 0.0;
        for (double x : sizes) s += std::pow(x, m);
        power[m - 1] = s;
      }
      o.dH.assign(r, 0.0);
      for (int i = 1; i <= r; ++i)
        for (int m = 1; m <= i; ++m) o.dH[i - 1] += problem.basis.coeff(i, m) * (power[m - 1] - compensator[m - 1]);
      total += o.prob;
      out.push_back(std::move(o));
    }
  }
  truncated_mass = std::max(0.0, 1.0 - total);
  for (auto& o : out) o.prob /= total;
  return out;
}

double eval_driver(const DriverFn& fn, double t, double x, double y, std::span<const double> z) {
  return fn ? fn(t, x, y, z) : 0.0;
}

// Applies the configured penalised step given the conditional mean, the
// martingale coefficients and the Brownian increment of the step.
struct StepContext {
  const BdsdeProblem& problem;
  const SolverConfig& config;
  double dt;

  double solve(double t, double x, double ybar, std::span<const double> z, double dB) const {
    auto rhs_at = [&](double y) {
      return ybar + eval_driver(problem.f, t, x, y, z) * dt + eval_driver(problem.g, t, x, y, z) * dB;
    };
    auto step = [&](double rhs) {
      if (config.step_mode == StepMode::explicit_step)
        return rhs - (dt / config.eps) * yosida_grad(problem.phi, config.eps, ybar);
      return implicit_prox_step(problem.phi, config.eps, dt, rhs);
    };
    double y = step(rhs_at(ybar));
    if (config.picard_refinement) y = step(rhs_at(y));
    return y;
  }

  double penalisation(double y) const { return yosida_grad(problem.phi, config.eps, y) / config.eps; }
};

void check_terminal(const ConvexFunction& phi, double xi) {
  if (!std::isfinite(xi)) throw NumericalError("bdsde_solver", "terminal value is not finite");
  if (!phi.in_domain(xi))
    throw DomainError("bdsde_solver", "terminal value " + std::to_string(xi) + " lies outside Dom(phi)");
}

// Tree data independent of the Brownian scenario: outcomes, forward states at
// every node and the terminal values at the leaves.
struct Tree {
  std::vector<StepOutcome> outcomes;
  std::vector<std::vector<double>> states;  // states[k][node]
  std::vector<double> terminal;             // leaves
  double truncated_mass = 0.0;
};

Tree build_tree(const BdsdeProblem& problem, const SolverConfig& config, const TimeGrid& grid) {
  Tree tree;
  tree.outcomes = enumerate_outcomes(problem, config, grid.dt(), tree.truncated_mass);
  const std::size_t n_out = tree.outcomes.size();
  const std::size_t N = grid.n_steps;

  std::size_t total = 0, level = 1;
  for (std::size_t k = 0; k <= N; ++k) {
    total += level;
    if (total > config.max_tree_nodes)
      throw ConfigError("bdsde_solver", "tree has more than " + std::to_string(config.max_tree_nodes) +
                                            " nodes; reduce n_steps or tree_max_jumps, or use regression");
    if (k < N) level *= n_out;
  }

  tree.states.resize(N + 1);
  tree.states[0] = {problem.forward.x0};
  for (std::size_t k = 0; k < N; ++k) {
    const auto& parent = tree.states[k];
    auto& child = tree.states[k + 1];
    child.resize(parent.size() * n_out);
    for (std::size_t n = 0; n < parent.size(); ++n)
      for (std::size_t o = 0; o < n_out; ++o)
        child[n * n_out + o] = problem.forward.advance(parent[n], tree.outcomes[o].dC, tree.outcomes[o].jumps);
  }

  const auto& leaves = tree.states[N];
  tree.terminal.resize(leaves.size());
  std::vector<double> state_path(N + 1), dl_path(N);
  for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
    std::size_t node = leaf;
    for (std::size_t k = N; k-- > 0;) {
      const std::size_t o = node % n_out;
      state_path[k + 1] = tree.states[k + 1][node];
      dl_path[k] = tree.outcomes[o].dL;
      node /= n_out;
    }
    state_path[0] = tree.states[0][0];
    const double xi = problem.terminal(PathView{state_path, dl_path});
    check_terminal(problem.phi, xi);
    tree.terminal[leaf] = xi;
  }
  return tree;
}

ScenarioResult solve_tree_scenario(const BdsdeProblem& problem, const SolverConfig& config,
                                   const TimeGrid& grid, const Tree& tree, std::size_t s,
                                   std::vector<double> dB) {
  const std::size_t N = grid.n_steps;
  const std::size_t n_out = tree.outcomes.size();
  const int r = problem.basis.rank();
  const double dt = grid.dt();
  const StepContext ctx{problem, config, dt};

  std::vector<std::vector<double>> Y(N + 1), Z(N);
  Y[N] = tree.terminal;
  std::vector<double> z(r);
  for (std::size_t k = N; k-- > 0;) {
    const auto& states = tree.states[k];
    Y[k].resize(states.size());
    Z[k].resize(states.size() * r);
    const double t = grid.node(k);
    for (std::size_t n = 0; n < states.size(); ++n) {
      const double* child = &Y[k + 1][n * n_out];
      double ybar = 0.0;
      for (std::size_t o = 0; o < n_out; ++o) ybar += tree.outcomes[o].prob * child[o];
      std::fill(z.begin(), z.end(), 0.0);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double w = tree.outcomes[o].prob * (child[o] - ybar);
        for (int i = 0; i < r; ++i) z[i] += w * tree.outcomes[o].dH[i];
      }
      for (int i = 0; i < r; ++i) {
        z[i] /= dt;
        Z[k][n * r + i] = z[i];
      }
      Y[k][n] = ctx.solve(t, states[n], ybar, z, dB[k]);
    }
  }

  ScenarioResult res;
  res.dB = std::move(dB);
  res.n_inner = config.n_inner;
  res.Y.resize(config.n_inner * (N + 1));
  res.U.resize(config.n_inner * (N + 1));
  res.Z.resize(config.n_inner * N * r);
  std::vector<double> probs;
  for (const auto& o : tree.outcomes) probs.push_back(o.prob);
  for (std::size_t j = 0; j < config.n_inner; ++j) {
    auto rng = make_rng(config.seed, Stream::sampling, s, j);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    std::size_t node = 0;
    for (std::size_t k = 0; k <= N; ++k) {
      const double y = Y[k][node];
      res.Y[j * (N + 1) + k] = y;
      res.U[j * (N + 1) + k] = ctx.penalisation(y);
      if (k == N) break;
      for (int i = 0; i < r; ++i) res.Z[(j * N + k) * r + i] = Z[k][node * r + i];
      node = node * n_out + pick(rng);
    }
  }
  res.y0 = Y[0][0];
  res.y0_std_error = 0.0;
  return res;
}

ScenarioResult solve_regression_scenario(const BdsdeProblem& problem, const SolverConfig& config,
                                         const TimeGrid& grid, std::size_t s, std::vector<double> dB,
                                         unsigned inner_workers) {
  const std::size_t N = grid.n_steps;
  const std::size_t M = config.n_inner;
  const int r = problem.basis.rank();
  const double dt = grid.dt();
  const StepContext ctx{problem, config, dt};

  // Column layouts: states[k][j], dH[(k * r + i)][j].
  std::vector<std::vector<double>> states(N + 1, std::vector<double>(M));
  std::vector<std::vector<double>> dH(N * r, std::vector<double>(M));
  std::vector<double> xi(M);
  parallel_for(M, inner_workers, [&](std::size_t j) {
    PathBundle bundle(grid);
    auto rng = make_rng(config.seed, Stream::levy, s, j);
    simulate_levy(problem.model, bundle, rng);
    h_increments(problem.basis, problem.model, bundle);
    std::vector<double> path(N + 1);
    path[0] = problem.forward.x0;
    for (std::size_t k = 0; k < N; ++k) {
      path[k + 1] = problem.forward.advance(path[k], bundle.dC[k], bundle.jumps_in_step(k));
      for (int i = 0; i < r; ++i) dH[k * r + i][j] = bundle.dH[i][k];
    }
    for (std::size_t k = 0; k <= N; ++k) states[k][j] = path[k];
    const double v = problem.terminal(PathView{path, bundle.dL});
    check_terminal(problem.phi, v);
    xi[j] = v;
  });

  ScenarioResult res;
  res.dB = std::move(dB);
  res.n_inner = M;
  res.Y.resize(M * (N + 1));
  res.U.resize(M * (N + 1));
  res.Z.resize(M * N * r);

  std::vector<double> next = xi, current(M), centred(M), theta = xi;
  for (std::size_t j = 0; j < M; ++j) {
    res.Y[j * (N + 1) + N] = xi[j];
    res.U[j * (N + 1) + N] = ctx.penalisation(xi[j]);
  }
  std::vector<std::vector<double>> zcols(r);
  for (std::size_t k = N; k-- > 0;) {
    const PolynomialProjector proj(states[k], config.degree);
    const std::vector<double> ybar = proj.project(next);
    for (int i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < M; ++j) centred[j] = (next[j] - ybar[j]) * dH[k * r + i][j];
      zcols[i] = proj.project(centred);
    }
    const double t = grid.node(k);
    const double dBk = res.dB[k];
    parallel_for(M, inner_workers, [&](std::size_t j) {
      std::vector<double> z(r);
      for (int i = 0; i < r; ++i) {
        z[i] = zcols[i][j] / dt;
        res.Z[(j * N + k) * r + i] = z[i];
      }
      current[j] = ctx.solve(t, states[k][j], ybar[j], z, dBk);
      res.Y[j * (N + 1) + k] = current[j];
      res.U[j * (N + 1) + k] = ctx.penalisation(current[j]);
      theta[j] += current[j] - ybar[j];
    });
    std::swap(next, current);
  }
  // Regressions contain the constant, so mean(theta) reproduces Y_0 and its
  // spread gives the Monte Carlo error of the estimate.
  const Estimate est = mean_and_error(theta);
  res.y0 = mean_and_error(next).value;
  res.y0_std_error = est.std_error;
  return res;
}

}  // namespace

double ForwardSpec::advance(double x, double continuous, std::span<const Jump> jumps) const {
  x += sigma_at(x) * continuous;
  for (const auto& j : jumps) x += sigma_at(x) * j.size;
  return x;
}

double ForwardSpec::advance(double x, double continuous, std::span<const double> jump_sizes) const {
  x += sigma_at(x) * continuous;
  for (double s : jump_sizes) x += sigma_at(x) * s;
  return x;
}

BdsdeProblem::BdsdeProblem(LevyModel m, TeugelsBasis b, TerminalFn xi)
    : model(std::move(m)), basis(std::move(b)), terminal(std::move(xi)) {}

void BdsdeProblem::validate() const {
  if (!terminal) throw ConfigError("bdsde_solver", "terminal condition is missing");
  if (!(t0 < horizon)) throw ConfigError("bdsde_solver", "need t0 < horizon");
  if (!(lipschitz_f >= 0.0) || !(lipschitz_g >= 0.0))
    throw ConfigError("bdsde_solver", "Lipschitz constants must be >= 0");
  if (!(alpha_g >= 0.0 && alpha_g < 1.0))
    throw ConfigError("bdsde_solver", "z-Lipschitz constant alpha of g must satisfy 0 <= alpha < 1");
  for (std::size_t n = 0; n < basis.mu_moments().size(); ++n) {
    const double expected = mu_moment(model, static_cast<int>(n));
    if (std::abs(expected - basis.mu_moments()[n]) > 1e-12 * std::max(1.0, std::abs(expected)))
      throw ConfigError("bdsde_solver", "Teugels basis was built from a different Levy model");
  }
}

void SolverConfig::validate() const {
  if (n_steps < 1) throw ConfigError("bdsde_solver", "n_steps must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("bdsde_solver", "eps must be > 0");
  if (n_inner < 1 || n_outer < 1) throw ConfigError("bdsde_solver", "sample counts must be >= 1");
  if (degree < 0) throw ConfigError("bdsde_solver", "regression degree must be >= 0");
  if (tree_max_jumps < 0) throw ConfigError("bdsde_solver", "tree_max_jumps must be >= 0");
  if (tree_gauss_nodes < 1) throw ConfigError("bdsde_solver", "tree_gauss_nodes must be >= 1");
}

double BdsdeSolution::Y(std::size_t s, std::size_t j, std::size_t k) const {
  return scenarios.at(s).Y.at(j * (grid.n_steps + 1) + k);
}

double BdsdeSolution::U(std::size_t s, std::size_t j, std::size_t k) const {
  return scenarios.at(s).U.at(j * (grid.n_steps + 1) + k);
}

double BdsdeSolution::Z(std::size_t s, std::size_t j, std::size_t k, int i) const {
  return scenarios.at(s).Z.at((j * grid.n_steps + k) * rank + static_cast<std::size_t>(i));
}

Estimate BdsdeSolution::y0() const {
  if (scenarios.size() == 1) return {scenarios[0].y0, scenarios[0].y0_std_error};
  std::vector<double> v;
  for (const auto& s : scenarios) v.push_back(s.y0);
  return mean_and_error(v);
}

double implicit_prox_step(const ConvexFunction& phi, double eps, double dt, double rhs) {
  // y + (dt/eps)(y - J_eps(y)) = rhs has the closed solution
  // y = rhs + dt/(eps + dt) (J_{eps+dt}(rhs) - rhs), by the resolvent identity.
  // One resolvent call is also better conditioned than bisecting on y when
  // dt/eps is large and J has no closed form.
  const double j = resolvent(phi, eps + dt, rhs);
  if (j == rhs) return rhs;
  const double y = rhs + dt / (eps + dt) * (j - rhs);
  if (!std::isfinite(y)) throw NumericalError("bdsde_solver", "implicit proximal step produced a non-finite value");
  return y;
}

BdsdeSolution solve_penalized(const BdsdeProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  const TimeGrid grid(problem.t0, problem.horizon, config.n_steps);

  BdsdeSolution sol{.grid = grid};
  sol.rank = problem.basis.rank();
  sol.eps = config.eps;
  sol.phi = problem.phi;
  sol.scenarios.resize(config.n_outer);

  const std::uint64_t bseed = config.brownian_seed.value_or(config.seed);
  auto brownian = [&](std::size_t s) {
    PathBundle b(grid);
    auto rng = make_rng(bseed, Stream::brownian, s);
    simulate_brownian(b, rng);
    return std::move(b.dB);
  };

  const unsigned outer_workers = config.n_outer > 1 ? config.workers : 1;
  const unsigned inner_workers = config.n_outer > 1 ? 1 : config.workers;
  if (config.ce_method == CeMethod::tree) {
    const Tree tree = build_tree(problem, config, grid);
    sol.truncated_mass = tree.truncated_mass;
    parallel_for(config.n_outer, outer_workers, [&](std::size_t s) {
      sol.scenarios[s] = solve_tree_scenario(problem, config, grid, tree, s, brownian(s));
    });
  } else {
    parallel_for(config.n_outer, outer_workers, [&](std::size_t s) {
      sol.scenarios[s] = solve_regression_scenario(problem, config, grid, s, brownian(s), inner_workers);
    });
  }
  sol.diagnostics = check_apriori(sol);
  return sol;
}

AprioriReport check_apriori(const BdsdeSolution& sol) {
  AprioriReport rep;
  rep.eps = sol.eps;
  const std::size_t N = sol.grid.n_steps;
  const double dt = sol.grid.dt();
  std::vector<double> sup_y, z_energy, u_energy;
  std::vector<std::vector<double>> gap_by_node(N + 1), phi_by_node(N + 1);
  for (std::size_t s = 0; s < sol.scenarios.size(); ++s) {
    const auto& sc = sol.scenarios[s];
    for (std::size_t j = 0; j < sc.n_inner; ++j) {
      double sy = 0.0, ze = 0.0, ue = 0.0;
      for (std::size_t k = 0; k <= N; ++k) {
        const double y = sc.Y[j * (N + 1) + k];
        const double u = sc.U[j * (N + 1) + k];
        sy = std::max(sy, y * y);
        const double g = sol.eps * u;
        gap_by_node[k].push_back(g * g);
        phi_by_node[k].push_back(sol.phi(resolvent(sol.phi, sol.eps, y)));
        if (k < N) {
          ue += u * u * dt;
          for (int i = 0; i < sol.rank; ++i) {
            const double z = sc.Z[(j * N + k) * sol.rank + i];
            ze += z * z * dt;
          }
        }
      }
      sup_y.push_back(sy);
      z_energy.push_back(ze);
      u_energy.push_back(ue);
    }
  }
  rep.sup_y_squared = mean_and_error(sup_y);
  rep.z_energy = mean_and_error(z_energy);
  rep.u_energy = mean_and_error(u_energy);
  for (std::size_t k = 0; k <= N; ++k) {
    const Estimate e = mean_and_error(gap_by_node[k]);
    if (k == 0 || e.value > rep.resolvent_gap.value) rep.resolvent_gap = e;
    const Estimate p = mean_and_error(phi_by_node[k]);
    if (k == 0 || p.value > rep.phi_of_resolvent.value) rep.phi_of_resolvent = p;
  }
  rep.finite = std::isfinite(rep.sup_y_squared.value) && std::isfinite(rep.z_energy.value) &&
               std::isfinite(rep.u_energy.value) && std::isfinite(rep.resolvent_gap.value) &&
               std::isfinite(rep.phi_of_resolvent.value);
  return rep;
}

Estimate cauchy_gap(const BdsdeSolution& a, const BdsdeSolution& b) {
  if (a.grid.n_steps != b.grid.n_steps || a.rank != b.rank || a.scenarios.size() != b.scenarios.size())
    throw ConfigError("bdsde_solver", "Cauchy gap needs solutions on the same grid and samples");
  const std::size_t N = a.grid.n_steps;
  const double dt = a.grid.dt();
  std::vector<double> d;
  for (std::size_t s = 0; s < a.scenarios.size(); ++s) {
    const auto& sa = a.scenarios[s];
    const auto& sb = b.scenarios[s];
    if (sa.n_inner != sb.n_inner) throw ConfigError("bdsde_solver", "Cauchy gap needs matching inner samples");
    for (std::size_t j = 0; j < sa.n_inner; ++j) {
      double sup = 0.0, zz = 0.0;
      for (std::size_t k = 0; k <= N; ++k) {
        const double dy = sa.Y[j * (N + 1) + k] - sb.Y[j * (N + 1) + k];
        sup = std::max(sup, dy * dy);
      }
      for (std::size_t idx = j * N * a.rank; idx < (j + 1) * N * a.rank; ++idx) {
        const double dz = sa.Z[idx] - sb.Z[idx];
        zz += dz * dz * dt;
      }
      d.push_back(sup + zz);
    }
  }
  return mean_and_error(d);
}

LimitResult solve_limit(const BdsdeProblem& problem, const SolverConfig& config,
                        std::span<const double> eps_ladder) {
  if (eps_ladder.empty()) throw ConfigError("bdsde_solver", "eps ladder is empty");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0)) throw ConfigError("bdsde_solver", "eps ladder entries must be > 0");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
      throw ConfigError("bdsde_solver", "eps ladder must be strictly decreasing");
  }

  CauchyReport report;
  std::optional<BdsdeSolution> previous;
  for (double eps : eps_ladder) {
    SolverConfig c = config;
    c.eps = eps;
    BdsdeSolution current = solve_penalized(problem, c);
    report.apriori.push_back(current.diagnostics);
    if (previous) {
      const Estimate gap = cauchy_gap(*previous, current);
      const double sum = previous->eps + eps;
      report.rows.push_back({previous->eps, eps, gap.value, gap.std_error, gap.value / sum});
    }
    previous = std::move(current);
  }

  // Slope of log D against log eps over the strictly positive gaps.
  std::vector<double> lx, ly;
  for (const auto& row : report.rows)
    if (row.gap > 0.0) {
      lx.push_back(std::log(row.eps));
      ly.push_back(std::log(row.gap));
    }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    report.slope = sxy / sxx;
  } else {
    report.slope = std::numeric_limits<double>::quiet_NaN();
  }

  if (!report.rows.empty()) {
    const auto& first = report.rows.front();
    report.c3 = first.ratio + 3.0 * first.gap_std_error / (first.eps + first.delta);
    for (const auto& row : report.rows) {
      const double lower = row.ratio - 3.0 * row.gap_std_error / (row.eps + row.delta);
      if (lower > report.c3 * (1.0 + 1e-12)) report.envelope_holds = false;
    }
  }
  return LimitResult{std::move(*previous), std::move(report)};
}

bool resolvent_gap_scaling_violated(std::span<const AprioriReport> ladder) {
  std::vector<double> lx, ly;
  for (const auto& r : ladder)
    if (r.resolvent_gap.value > 0.0) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.resolvent_gap.value / (r.eps * r.eps)));
    }
  if (lx.size() < 2) return false;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 && sxy / sxx < -0.5;
}

}  // namespace levybdsde
