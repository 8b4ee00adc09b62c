#include "levybdsde/mspdie.hpp"

#include <array>
#include <cmath>
#include <string>

#include "levybdsde/errors.hpp"
#include "levybdsde/parallel.hpp"
#include "levybdsde/random.hpp"

namespace levybdsde {

namespace {

constexpr double kFlowTol = 1e-10;
constexpr double kBlowUp = 1e100;
constexpr long kMaxFlowSteps = 10'000'000;
constexpr double kFdStep = 1e-5;
constexpr double kFdStep2 = 1e-4;

Estimate mean_and_error(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void check_grid(const MspdieProblem& problem, const TimeGrid& grid) {
  if (std::abs(grid.T - problem.horizon) > 1e-12 * std::max(1.0, std::abs(problem.horizon)))
    throw ConfigError("mspdie", "forward grid must end at the horizon T");
}

// y, dy/dy0 and d^2y/dy0^2 along dy/db = g(y).
using FlowState = std::array<double, 3>;

FlowState flow_rhs(const FlowField& flow, const FlowState& s, bool variational) {
  const double y = s[0];
  if (!variational) return {flow.g(y), 0.0, 0.0};
  const double g1 = flow.dg(y);
  return {flow.g(y), g1 * s[1], flow.d2g(y) * s[1] * s[1] + g1 * s[2]};
}

FlowState rk4(const FlowField& flow, const FlowState& s, double h, bool variational) {
  auto axpy = [](const FlowState& a, double c, const FlowState& b) {
    return FlowState{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
  };
  const FlowState k1 = flow_rhs(flow, s, variational);
  const FlowState k2 = flow_rhs(flow, axpy(s, 0.5 * h, k1), variational);
  const FlowState k3 = flow_rhs(flow, axpy(s, 0.5 * h, k2), variational);
  const FlowState k4 = flow_rhs(flow, axpy(s, h, k3), variational);
  FlowState out;
  for (int i = 0; i < 3; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// RK4 with step doubling. The local error of y per step is held below
// kFlowTol * (1 + |y|) * |h| / |b| so the global error stays near kFlowTol.
// The variational components ride along uncontrolled: with difference
// quotients for g' and g'' their rounding noise would stall the control.
FlowState integrate_flow(const FlowField& flow, double y0, double b, bool variational) {
  FlowState s{y0, 1.0, 0.0};
  if (b == 0.0) return s;
  const double total = std::abs(b);
  const double dir = b > 0.0 ? 1.0 : -1.0;
  double done = 0.0;
  double h = total;
  for (long step = 0; done < total; ++step) {
    if (step > kMaxFlowSteps || h < 1e-14 * total)
      throw NumericalError("mspdie", "flow integration stalled; g has no global flow over this increment");
    h = std::min(h, total - done);
    const FlowState full = rk4(flow, s, dir * h, variational);
    const FlowState half = rk4(flow, rk4(flow, s, 0.5 * dir * h, variational), 0.5 * dir * h, variational);
    double ratio = 0.0;
    bool finite = true;
    for (int i = 0; i < 3; ++i) finite = finite && std::isfinite(full[i]) && std::isfinite(half[i]);
    ratio = std::abs(half[0] - full[0]) / 15.0 / (kFlowTol * (1.0 + std::abs(half[0])) * h / total);
    if (!finite) {
      h *= 0.25;
      continue;
    }
    if (ratio <= 1.0) {
      for (int i = 0; i < 3; ++i) s[i] = half[i] + (half[i] - full[i]) / 15.0;
      done += h;
      if (!std::isfinite(s[0]) || std::abs(s[0]) > kBlowUp)
        throw NumericalError("mspdie", "flow of g blew up before the Brownian increment was consumed");
      h *= ratio > 0.0 ? std::min(4.0, 0.9 * std::pow(ratio, -0.2)) : 4.0;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(ratio, -0.2));
    }
  }
  return s;
}

FlowJet flow_jet(const FlowField& flow, double y, double b) {
  FlowJet jet;
  switch (flow.kind()) {
    case FlowField::Kind::zero:
    case FlowField::Kind::constant:
      jet.value = integrate_flow(flow, y, b, false)[0];
      break;
    case FlowField::Kind::linear:
      jet.value = integrate_flow(flow, y, b, false)[0];
      jet.dy = std::exp(flow.beta() * b);
      break;
    case FlowField::Kind::custom: {
      const FlowState s = integrate_flow(flow, y, b, true);
      jet.value = s[0];
      jet.dy = s[1];
      jet.dyy = s[2];
      break;
    }
  }
  return jet;
}

}  // namespace

ForwardPaths simulate_forward(const MspdieProblem& problem, double x, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  check_grid(problem, grid);
  const std::size_t N = grid.n_steps;
  ForwardPaths out{grid, n_paths};
  out.values.resize(n_paths * (N + 1));
  const ForwardSpec spec{x, problem.sigma};
  parallel_for(n_paths, workers, [&](std::size_t j) {
    PathBundle bundle(grid);
    auto rng = make_rng(seed, Stream::levy, j);
    simulate_levy(problem.model, bundle, rng);
    double* row = &out.values[j * (N + 1)];
    row[0] = x;
    for (std::size_t k = 0; k < N; ++k) row[k + 1] = spec.advance(row[k], bundle.dC[k], bundle.jumps_in_step(k));
  });
  return out;
}

std::vector<double> simulate_forward_nd(const LevyModel& model, const VectorField& sigma,
                                        std::span<const double> x, const TimeGrid& grid,
                                        std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  const std::size_t d = x.size();
  const std::size_t N = grid.n_steps;
  if (d == 0) throw ConfigError("mspdie", "forward state needs at least one component");
  std::vector<double> out(n_paths * (N + 1) * d);
  parallel_for(n_paths, workers, [&](std::size_t j) {
    PathBundle bundle(grid);
    auto rng = make_rng(seed, Stream::levy, j);
    simulate_levy(model, bundle, rng);
    std::vector<double> state(x.begin(), x.end()), s(d);
    auto store = [&](std::size_t k) {
      std::copy(state.begin(), state.end(), out.begin() + static_cast<std::ptrdiff_t>((j * (N + 1) + k) * d));
    };
    auto kick = [&](double dl) {
      sigma(state, s);
      for (std::size_t i = 0; i < d; ++i) state[i] += s[i] * dl;
    };
    store(0);
    for (std::size_t k = 0; k < N; ++k) {
      kick(bundle.dC[k]);
      for (const auto& jump : bundle.jumps_in_step(k)) kick(jump.size);
      store(k + 1);
    }
  });
  return out;
}

FlowMomentReport flow_moment_check(const MspdieProblem& problem, double t, double x, double t2,
                                   double x2, std::size_t n_paths, std::size_t n_steps,
                                   std::uint64_t seed, unsigned workers) {
  if (n_paths < 1) throw ConfigError("mspdie", "n_paths must be >= 1");
  const TimeGrid grid(0.0, problem.horizon, n_steps);
  auto node_of = [&](double s) {
    if (s < 0.0 || s > problem.horizon) throw ConfigError("mspdie", "start times must lie in [0, T]");
    const double r = s / grid.dt();
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9) throw ConfigError("mspdie", "start times must be grid nodes");
    return static_cast<std::size_t>(k);
  };
  const std::size_t k1 = node_of(t);
  const std::size_t k2 = node_of(t2);
  const ForwardSpec a{x, problem.sigma};
  const ForwardSpec b{x2, problem.sigma};

  std::vector<double> d2(n_paths), d4(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t j) {
    PathBundle bundle(grid);
    auto rng = make_rng(seed, Stream::levy, j);
    simulate_levy(problem.model, bundle, rng);
    double xa = x, xb = x2;
    double sup = std::abs(xa - xb);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const auto jumps = bundle.jumps_in_step(k);
      if (k >= k1) xa = a.advance(xa, bundle.dC[k], jumps);
      if (k >= k2) xb = b.advance(xb, bundle.dC[k], jumps);
      sup = std::max(sup, std::abs(xa - xb));
    }
    d2[j] = sup * sup;
    d4[j] = d2[j] * d2[j];
  });

  FlowMomentReport rep;
  const Estimate e4 = mean_and_error(d4);
  const Estimate e2 = mean_and_error(d2);
  rep.m4 = e4.value;
  rep.m4_std_error = e4.std_error;
  rep.m2 = e2.value;
  rep.m2_std_error = e2.std_error;
  const double dt = t2 - t;
  const double dx = x2 - x;
  rep.scale = dt * dt + dx * dx * dx * dx;
  rep.ratio = rep.scale > 0.0 ? rep.m4 / rep.scale : 0.0;
  return rep;
}

double generator_apply(const MspdieProblem& problem, const TestFunction& fn, double, double x) {
  const auto& model = problem.model;
  const double s = problem.sigma_at(x);
  const double v = fn.value(x);
  const double d1 = fn.d1(x);
  double out = mean_L1(model) * s * d1;
  if (model.kappa() != 0.0) out += 0.5 * model.kappa() * model.kappa() * s * s * fn.d2(x);
  for (const auto& atom : model.atoms())
    out += atom.intensity * (fn.value(x + s * atom.size) - v - d1 * s * atom.size);
  return out;
}

double generator_apply_nd(const LevyModel& model, const VectorField& sigma, const TestFunctionNd& fn,
                          std::span<const double> x) {
  const std::size_t d = x.size();
  std::vector<double> s(d), grad(d), hess(d * d), shifted(d);
  sigma(x, s);
  fn.gradient(x, grad);
  double first = 0.0;
  for (std::size_t i = 0; i < d; ++i) first += s[i] * grad[i];
  double out = mean_L1(model) * first;
  if (model.kappa() != 0.0) {
    fn.hessian(x, hess);
    double quad = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t l = 0; l < d; ++l) quad += s[i] * s[l] * hess[i * d + l];
    out += 0.5 * model.kappa() * model.kappa() * quad;
  }
  const double v = fn.value(x);
  for (const auto& atom : model.atoms()) {
    for (std::size_t i = 0; i < d; ++i) shifted[i] = x[i] + s[i] * atom.size;
    out += atom.intensity * (fn.value(shifted) - v - first * atom.size);
  }
  return out;
}

double phi1_k(const MspdieProblem& problem, const TeugelsBasis& basis, const TestFunction& fn, int k,
              double, double x) {
  if (k < 1 || k > basis.rank())
    throw ConfigError("mspdie", "phi1_k index " + std::to_string(k) + " outside 1.." + std::to_string(basis.rank()));
  const auto pk = basis.p(k);
  const double s = problem.sigma_at(x);
  const double v = fn.value(x);
  double out = 0.0;
  for (const auto& atom : problem.model.atoms())
    out += atom.intensity * (fn.value(x + s * atom.size) - v) * pk.poly(atom.size);
  return out;
}

FlowField FlowField::zero() {
  return {Kind::zero, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

FlowField FlowField::constant(double beta) {
  return {Kind::constant, beta, [beta](double) { return beta; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

FlowField FlowField::linear(double beta) {
  return {Kind::linear, beta, [beta](double y) { return beta * y; }, [beta](double) { return beta; },
          [](double) { return 0.0; }};
}

FlowField FlowField::custom(ScalarFn g, ScalarFn dg, ScalarFn d2g) {
  if (!g) throw ConfigError("mspdie", "flow needs a coefficient g");
  return {Kind::custom, 0.0, std::move(g), std::move(dg), std::move(d2g)};
}

double FlowField::dg(double y) const {
  if (dg_) return dg_(y);
  return (g_(y + kFdStep) - g_(y - kFdStep)) / (2.0 * kFdStep);
}

double FlowField::d2g(double y) const {
  if (d2g_) return d2g_(y);
  return (g_(y + kFdStep2) - 2.0 * g_(y) + g_(y - kFdStep2)) / (kFdStep2 * kFdStep2);
}

double flow_eta(const FlowField& flow, double, double, double y, double b) {
  return integrate_flow(flow, y, b, false)[0];
}

double flow_eps(const FlowField& flow, double, double, double y, double b) {
  return integrate_flow(flow, y, -b, false)[0];
}

FlowJet flow_eta_jet(const FlowField& flow, double, double, double y, double b) { return flow_jet(flow, y, b); }

FlowJet flow_eps_jet(const FlowField& flow, double, double, double y, double b) { return flow_jet(flow, y, -b); }

Jet jet_transform(const FlowField& flow, JetDirection direction, double t, double x, double value,
                  double b, const Jet& jet) {
  const FlowJet d = direction == JetDirection::u_to_v ? flow_eps_jet(flow, t, x, value, b)
                                                      : flow_eta_jet(flow, t, x, value, b);
  if (!(d.dy > 0.0)) throw DomainError("mspdie", "flow is not a diffeomorphism at this point (D_y <= 0)");
  Jet out;
  out.a = d.dy * jet.a;
  out.p = d.dy * jet.p + d.dx;
  out.X = d.dy * jet.X + 2.0 * d.dxy * jet.p + d.dxx + d.dyy * jet.p * jet.p;
  return out;
}

std::vector<double> theta_vector(const MspdieProblem& problem, const TeugelsBasis& basis, double x, double p) {
  const double s = problem.sigma_at(x);
  std::vector<double> theta(basis.rank(), 0.0);
  for (int k = 1; k <= basis.rank(); ++k) {
    const auto pk = basis.p(k);
    for (const auto& atom : problem.model.atoms())
      theta[k - 1] += atom.intensity * p * s * atom.size * pk.poly(atom.size);
  }
  return theta;
}

double transformed_driver(const FlowField& flow, const MspdieProblem& problem, double t, double x,
                          double y, double b, double p_v, std::span<const double> theta) {
  const FlowJet eta = flow_eta_jet(flow, t, x, y, b);
  if (!(eta.dy > 0.0)) throw DomainError("mspdie", "flow is not a diffeomorphism at this point (D_y <= 0)");
  const double s = problem.sigma_at(x);
  double lambda = 1.0;
  for (const auto& atom : problem.model.atoms()) lambda += atom.intensity * atom.size * atom.size;

  // eta does not depend on x for autonomous g, so the jump increments of eta
  // in x and L_x eta drop out; only the y-derivatives survive.
  std::vector<double> z(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) z[k] = eta.dy * theta[k];
  const double fv = problem.f ? problem.f(t, x, eta.value, z) : 0.0;
  double bracket = fv;
  if (flow.kind() != FlowField::Kind::zero) {
    bracket += -0.5 * flow.g(eta.value) * flow.dg(eta.value) + lambda * s * eta.dxy * s * p_v +
               0.5 * lambda * eta.dyy * (s * p_v) * (s * p_v);
  }
  return bracket / eta.dy;
}

UEstimate estimate_u(const MspdieProblem& problem, double t, double x, const SolverConfig& config) {
  if (!problem.u0) throw ConfigError("mspdie", "u0 is missing");
  if (!(t <= problem.horizon)) throw ConfigError("mspdie", "t must not exceed the horizon");
  UEstimate est;
  if (t == problem.horizon) {
    est.value = est.ci_low = est.ci_high = problem.u0(x);
    est.samples.assign(config.n_outer, est.value);
    return est;
  }

  auto u0 = problem.u0;
  BdsdeProblem bp(problem.model, orthonormalize(problem.model, problem.basis_order),
                  [u0](const PathView& v) { return u0(v.state.back()); });
  bp.t0 = t;
  bp.horizon = problem.horizon;
  bp.f = problem.f;
  if (problem.g) {
    auto g = problem.g;
    bp.g = [g](double s, double xs, double y, std::span<const double>) { return g(s, xs, y); };
  }
  bp.phi = problem.phi;
  bp.forward = ForwardSpec{x, problem.sigma};

  const BdsdeSolution sol = solve_penalized(bp, config);
  const Estimate y0 = sol.y0();
  est.value = y0.value;
  est.std_error = y0.std_error;
  est.ci_low = y0.value - 1.96 * y0.std_error;
  est.ci_high = y0.value + 1.96 * y0.std_error;
  for (const auto& s : sol.scenarios) est.samples.push_back(s.y0);
  return est;
}

}  // namespace levybdsde
