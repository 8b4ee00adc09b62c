#include "levybdsde/cli/runner.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <random>

#include "levybdsde/cli/catalog.hpp"
#include "levybdsde/cli/output.hpp"
#include "levybdsde/errors.hpp"
#include "levybdsde/mspdie.hpp"
#include "levybdsde/random.hpp"

namespace levybdsde::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
  const ExperimentConfig& config;
  std::string hash;
  fs::path dir;
  std::ostream& log;

  void write(const std::string& name, const std::string& content) const {
    write_atomic(dir / name, content);
    log << "wrote " << (dir / name).string() << "\n";
  }
  void write_json(const std::string& name, const json& doc) const { write(name, json_with_hash(doc, hash)); }
  CsvWriter csv(const std::vector<std::string>& columns) const { return CsvWriter(hash, columns); }
};

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

json apriori_json(const AprioriReport& r) {
  return {{"eps", r.eps},
          {"sup_y_squared", estimate_json(r.sup_y_squared)},
          {"z_energy", estimate_json(r.z_energy)},
          {"u_energy", estimate_json(r.u_energy)},
          {"phi_of_resolvent", estimate_json(r.phi_of_resolvent)},
          {"resolvent_gap", estimate_json(r.resolvent_gap)},
          {"finite", r.finite}};
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

BdsdeProblem build_problem(const ExperimentConfig& c) {
  const auto& p = c.problem;
  const LevyModel model = c.model.build();
  auto terminal = make_terminal(p.terminal);
  BdsdeProblem problem(model, orthonormalize(model, c.basis.order, c.basis.pivot_tol),
                       [terminal](const PathView& v) { return terminal(v.state.back()); });
  problem.t0 = p.t0;
  problem.horizon = p.horizon;
  problem.f = make_driver(p.f);
  if (auto g = make_noise(p.g)) problem.g = [g](double t, double x, double y, std::span<const double>) { return g(t, x, y); };
  problem.phi = make_phi(p.phi);
  problem.forward = ForwardSpec{p.x0, make_sigma(p.sigma)};
  problem.lipschitz_f = p.lipschitz_f;
  problem.lipschitz_g = p.lipschitz_g;
  problem.alpha_g = p.alpha_g;
  return problem;
}

void run_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const LevyModel model = c.model.build();
  const TimeGrid grid(0.0, c.simulate.horizon, c.simulate.n_steps);
  const auto paths = simulate_paths(model, grid, c.simulate.n_paths, c.seed, c.workers);

  auto csv = ctx.csv({"path", "step", "t", "dB", "dL", "L", "jumps"});
  std::vector<double> lt, bt, counts;
  for (std::size_t j = 0; j < paths.size(); ++j) {
    const auto& p = paths[j];
    lt.push_back(p.levy_terminal());
    bt.push_back(p.brownian_terminal());
    counts.push_back(static_cast<double>(p.jumps.size()));
    if (j >= c.output.max_paths) continue;
    double l = 0.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      l += p.dL[k];
      csv.row({static_cast<double>(j), static_cast<double>(k + 1), grid.node(k + 1), p.dB[k], p.dL[k], l,
               static_cast<double>(p.jump_count(k))});
    }
  }
  auto stats = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= n;
    for (double x : v) s += (x - m) * (x - m);
    const double var = v.size() > 1 ? s / (n - 1.0) : 0.0;
    return json{{"mean", m}, {"mean_std_error", std::sqrt(var / n)}, {"variance", var}};
  };
  const double T = c.simulate.horizon;
  json summary{{"n_paths", paths.size()},
               {"L_T", stats(lt)},
               {"L_T_expected", {{"mean", mean_L1(model) * T}, {"variance", variance_L1(model) * T}}},
               {"B_T", stats(bt)},
               {"jump_count", stats(counts)},
               {"jump_count_expected_mean", model.total_intensity() * T}};
  ctx.write("paths.csv", csv.str());
  ctx.write_json("simulate.json", summary);
}

void run_teugels(const Context& ctx) {
  const auto& c = ctx.config;
  const LevyModel model = c.model.build();
  const auto basis = orthonormalize(model, c.basis.order, c.basis.pivot_tol);
  auto csv = ctx.csv({"i", "k", "coeff"});
  csv.comment("rank", std::to_string(basis.rank()));
  csv.comment("gram_residual", format_double(basis.gram_residual()));
  json q = json::array();
  for (int i = 1; i <= basis.rank(); ++i) {
    for (int k = 1; k <= i; ++k) csv.row({static_cast<double>(i), static_cast<double>(k), basis.coeff(i, k)});
    q.push_back(basis.q(i - 1).coeffs);
  }
  json doc{{"rank", basis.rank()},
           {"requested_order", basis.requested_order()},
           {"gram_residual", basis.gram_residual()},
           {"q_coefficients", q},
           {"mu_moments", basis.mu_moments()}};
  ctx.write("basis.csv", csv.str());
  ctx.write_json("teugels.json", doc);
}

void run_prox_check(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& pc = c.prox_check;
  const ConvexFunction phi = make_phi(pc.phi);
  auto csv = ctx.csv({"eps", "x", "resolvent", "yosida_grad", "yosida_value", "penalty"});
  json checks = json::array();
  for (std::size_t e = 0; e < pc.eps.size(); ++e) {
    const double eps = pc.eps[e];
    for (std::size_t i = 0; i < pc.x_points; ++i) {
      const double x = pc.x_min + (pc.x_max - pc.x_min) * static_cast<double>(i) / static_cast<double>(pc.x_points - 1);
      const double g = yosida_grad(phi, eps, x);
      csv.row({eps, x, resolvent(phi, eps, x), g, yosida_value(phi, eps, x), g / eps});
    }
    // Largest excess over each property on random pairs (<= 0 means it held).
    auto rng = make_rng(c.seed, Stream::sampling, e);
    std::uniform_real_distribution<double> point(pc.x_min, pc.x_max), other(0.5 * eps, 2.0 * eps);
    double nonexpansive = -INFINITY, lower = -INFINITY, upper = -INFINITY, identity = 0.0, pair = -INFINITY;
    for (std::size_t n = 0; n < pc.samples; ++n) {
      const double x = point(rng), y = point(rng), delta = other(rng);
      const double jx = resolvent(phi, eps, x), jy = resolvent(phi, eps, y);
      const double gx = x - jx, gd = yosida_grad(phi, delta, y);
      const double env = yosida_value(phi, eps, x);
      nonexpansive = std::max(nonexpansive, std::abs(jx - jy) - std::abs(x - y));
      lower = std::max(lower, -env);
      upper = std::max(upper, env - gx * x);
      identity = std::max(identity, std::abs(gx * gx - (2.0 * env - 2.0 * eps * phi(jx))));
      pair = std::max(pair, -(1.0 / eps + 1.0 / delta) * std::abs(gx) * std::abs(gd) - (gx / eps - gd / delta) * (x - y));
    }
    checks.push_back({{"eps", eps},
                      {"samples", pc.samples},
                      {"nonexpansive_excess", nonexpansive + 0.0},
                      {"envelope_lower_excess", lower + 0.0},
                      {"envelope_upper_excess", upper + 0.0},
                      {"squared_identity_residual", identity + 0.0},
                      {"monotone_pair_excess", pair + 0.0}});
  }
  ctx.write("prox_table.csv", csv.str());
  ctx.write_json("prox_check.json", {{"phi", phi.name()}, {"checks", checks}});
}

void write_trajectories(const Context& ctx, const BdsdeSolution& sol, const std::string& name) {
  std::vector<std::string> cols{"scenario", "path", "step", "t", "Y", "U"};
  for (int i = 1; i <= sol.rank; ++i) cols.push_back("Z_" + std::to_string(i));
  auto csv = ctx.csv(cols);
  const std::size_t N = sol.n_steps();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t s = 0; s < sol.scenarios.size(); ++s) {
    const std::size_t paths = std::min(ctx.config.output.max_paths, sol.scenarios[s].n_inner);
    for (std::size_t j = 0; j < paths; ++j)
      for (std::size_t k = 0; k <= N; ++k) {
        std::vector<double> row{static_cast<double>(s), static_cast<double>(j), static_cast<double>(k),
                                sol.grid.node(k), sol.Y(s, j, k), sol.U(s, j, k)};
        for (int i = 0; i < sol.rank; ++i) row.push_back(k < N ? sol.Z(s, j, k, i) : nan);
        csv.row(row);
      }
  }
  ctx.write(name, csv.str());
}

json solution_json(const BdsdeSolution& sol) {
  json per = json::array();
  for (const auto& s : sol.scenarios) per.push_back({{"y0", s.y0}, {"y0_std_error", s.y0_std_error}});
  return {{"eps", sol.eps},
          {"n_steps", sol.n_steps()},
          {"rank", sol.rank},
          {"y0", estimate_json(sol.y0())},
          {"truncated_mass", sol.truncated_mass},
          {"scenarios", per},
          {"apriori", apriori_json(sol.diagnostics)}};
}

void run_solve(const Context& ctx) {
  const auto sol = solve_penalized(build_problem(ctx.config), ctx.config.solver);
  if (!sol.diagnostics.finite) throw NumericalError("bdsde_solver", "solution contains non-finite values");
  write_trajectories(ctx, sol, "trajectories.csv");
  ctx.write_json("solution.json", solution_json(sol));
}

void run_converge(const Context& ctx) {
  const auto& c = ctx.config;
  const auto result = solve_limit(build_problem(c), c.solver, c.eps_ladder);
  const auto& rep = result.report;
  auto csv = ctx.csv({"eps", "delta", "gap", "gap_std_error", "ratio", "slope"});
  csv.comment("slope", format_double(rep.slope));
  csv.comment("c3", format_double(rep.c3));
  csv.comment("envelope_holds", rep.envelope_holds ? "true" : "false");
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv.row({r.eps, r.delta, r.gap, r.gap_std_error, r.ratio, rep.slope});
    rows.push_back({{"eps", r.eps}, {"delta", r.delta}, {"gap", r.gap}, {"gap_std_error", r.gap_std_error}, {"ratio", r.ratio}});
  }
  auto apriori_csv = ctx.csv({"eps", "sup_y_squared", "z_energy", "u_energy", "phi_of_resolvent", "resolvent_gap",
                              "resolvent_gap_over_eps2"});
  json apriori = json::array();
  for (const auto& a : rep.apriori) {
    apriori_csv.row({a.eps, a.sup_y_squared.value, a.z_energy.value, a.u_energy.value, a.phi_of_resolvent.value,
                     a.resolvent_gap.value, a.resolvent_gap.value / (a.eps * a.eps)});
    apriori.push_back(apriori_json(a));
  }
  ctx.write("ladder.csv", csv.str());
  ctx.write("apriori.csv", apriori_csv.str());
  ctx.write_json("converge.json", {{"slope", rep.slope},
                                   {"c3", rep.c3},
                                   {"envelope_holds", rep.envelope_holds},
                                   {"resolvent_gap_scaling_violated", resolvent_gap_scaling_violated(rep.apriori)},
                                   {"rows", rows},
                                   {"apriori", apriori},
                                   {"finest", solution_json(result.solution)}});
}

MspdieProblem build_mspdie(const ExperimentConfig& c) {
  const auto& p = c.problem;
  MspdieProblem problem(c.model.build());
  problem.sigma = make_sigma(p.sigma);
  problem.horizon = p.horizon;
  problem.f = make_driver(p.f);
  problem.g = make_noise(p.g);
  problem.u0 = make_terminal(p.terminal);
  problem.phi = make_phi(p.phi);
  problem.basis_order = c.basis.order;
  return problem;
}

void run_mspdie(const Context& ctx) {
  const auto& c = ctx.config;
  const auto problem = build_mspdie(c);
  const auto u = estimate_u(problem, c.problem.t, c.problem.x, c.solver);
  ctx.write_json("mspdie.json", {{"t", c.problem.t},
                                 {"x", c.problem.x},
                                 {"u", u.value},
                                 {"std_error", u.std_error},
                                 {"ci_low", u.ci_low},
                                 {"ci_high", u.ci_high},
                                 {"samples", u.samples}});
  if (c.problem.x_sweep.empty()) return;
  auto csv = ctx.csv({"t", "x", "u", "std_error", "ci_low", "ci_high"});
  for (double x : c.problem.x_sweep) {
    const auto v = estimate_u(problem, c.problem.t, x, c.solver);
    csv.row({c.problem.t, x, v.value, v.std_error, v.ci_low, v.ci_high});
  }
  ctx.write("sweep.csv", csv.str());
}

void run_flow_check(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& fc = c.flow_check;
  MspdieProblem problem(c.model.build());
  problem.sigma = make_sigma(c.problem.sigma);
  problem.horizon = c.problem.horizon;
  auto csv = ctx.csv({"direction", "h", "m4", "m4_std_error", "m2", "m2_std_error", "ratio"});
  csv.comment("direction", "0 = space (x' = x + h), 1 = time (t' = t + h)");
  std::vector<double> lx, l4, lt, l2;
  json rows = json::array();
  auto record = [&](int direction, double h, const FlowMomentReport& r) {
    csv.row({static_cast<double>(direction), h, r.m4, r.m4_std_error, r.m2, r.m2_std_error, r.ratio});
    rows.push_back({{"direction", direction ? "time" : "space"}, {"h", h}, {"m4", r.m4}, {"m4_std_error", r.m4_std_error},
                    {"m2", r.m2}, {"m2_std_error", r.m2_std_error}, {"ratio", r.ratio}});
  };
  for (double h : fc.dx) {
    const auto r = flow_moment_check(problem, fc.t, fc.x, fc.t, fc.x + h, fc.n_paths, fc.n_steps, c.seed, c.workers);
    record(0, h, r);
    if (h > 0.0 && r.m4 > 0.0) {
      lx.push_back(std::log(h));
      l4.push_back(std::log(r.m4));
    }
  }
  for (double h : fc.dt) {
    const auto r = flow_moment_check(problem, fc.t, fc.x, fc.t + h, fc.x, fc.n_paths, fc.n_steps, c.seed, c.workers);
    record(1, h, r);
    if (h > 0.0 && r.m2 > 0.0) {
      lt.push_back(std::log(h));
      l2.push_back(std::log(r.m2 * r.m2));
    }
  }
  ctx.write("flow_check.csv", csv.str());
  ctx.write_json("flow_check.json", {{"space_slope_m4", ls_slope(lx, l4)}, {"time_slope_m2_squared", ls_slope(lt, l2)}, {"rows", rows}});
}

}  // namespace

void run(const ExperimentConfig& config, std::ostream& log) {
  const Context ctx{config, hex64(fnv1a64(config.resolved.dump())), fs::path(config.output.dir), log};
  ctx.write_json("resolved_config.json", config.resolved);
  const auto& cmd = config.command;
  if (cmd == "simulate") {
    run_simulate(ctx);
  } else if (cmd == "teugels") {
    run_teugels(ctx);
  } else if (cmd == "prox-check") {
    run_prox_check(ctx);
  } else if (cmd == "solve") {
    run_solve(ctx);
  } else if (cmd == "converge") {
    run_converge(ctx);
  } else if (cmd == "mspdie") {
    run_mspdie(ctx);
  } else if (cmd == "flow-check") {
    run_flow_check(ctx);
  } else {
    throw ConfigError("cli", "unknown command '" + cmd + "'");
  }
}

int run_main(const std::string& config_path, const Overrides& overrides, std::ostream& log, std::ostream& err) {
  try {
    run(load_config(config_path, overrides), log);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace levybdsde::cli
