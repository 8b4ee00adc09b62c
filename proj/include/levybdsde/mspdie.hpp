#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "levybdsde/bdsde_solver.hpp"
#include "levybdsde/convex.hpp"
#include "levybdsde/levy_model.hpp"
#include "levybdsde/teugels.hpp"

namespace levybdsde {

// (t, x, y) -> g. The Markovian layer keeps g free of z.
using NoiseFn = std::function<double(double, double, double)>;

struct MspdieProblem {
  explicit MspdieProblem(LevyModel m) : model(std::move(m)) {}

  LevyModel model;
  ScalarFn sigma;  // empty means sigma = 1
  double horizon = 1.0;
  DriverFn f;      // (t, x, y, z); empty means 0
  NoiseFn g;       // empty means 0
  ScalarFn u0;
  ConvexFunction phi = ConvexFunction::zero();
  // Number of Teugels martingales used by estimate_u.
  int basis_order = 2;

  double sigma_at(double x) const { return sigma ? sigma(x) : 1.0; }
};

// Test function with its first two derivatives.
struct TestFunction {
  ScalarFn value;
  ScalarFn d1;
  ScalarFn d2;
};

// Forward states on a grid, path-major: at(j, k) = X^j at node k.
struct ForwardPaths {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::vector<double> values{};

  double at(std::size_t j, std::size_t k) const { return values[j * (grid.n_steps + 1) + k]; }
  double terminal(std::size_t j) const { return at(j, grid.n_steps); }
};

// Euler scheme X_{k+1} = X_k + sigma(X_k) dC_k with each jump applied at its
// exact size using sigma at the pre-jump state. The grid must end at the
// problem horizon; path j uses the Levy stream (seed, j).
ForwardPaths simulate_forward(const MspdieProblem& problem, double x, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed, unsigned workers = 1);

// Componentwise sigma for d > 1: writes sigma(x) into out.
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

// Same scheme in d dimensions, every component driven by the same L.
// Layout: values[(j * (N + 1) + k) * d + i].
std::vector<double> simulate_forward_nd(const LevyModel& model, const VectorField& sigma,
                                        std::span<const double> x, const TimeGrid& grid,
                                        std::size_t n_paths, std::uint64_t seed, unsigned workers = 1);

struct FlowMomentReport {
  double m4 = 0.0;  // E sup_s |X^{t,x}_s - X^{t',x'}_s|^4
  double m4_std_error = 0.0;
  double m2 = 0.0;  // E sup_s |X^{t,x}_s - X^{t',x'}_s|^2
  double m2_std_error = 0.0;
  double scale = 0.0;  // |t' - t|^2 + |x - x'|^4
  double ratio = 0.0;  // m4 / scale (0 when scale == 0)
};

// Synchronous coupling on a common grid over [0, T]; t and t' must be grid
// nodes and each process is frozen at its start value before its start time.
FlowMomentReport flow_moment_check(const MspdieProblem& problem, double t, double x, double t2,
                                   double x2, std::size_t n_paths, std::size_t n_steps,
                                   std::uint64_t seed, unsigned workers = 1);

// L phi(x) for the atomic Levy measure:
// m1 sigma phi' + kappa^2 sigma^2 phi'' / 2 + sum_j lambda_j [phi(x + sigma x_j) - phi(x) - phi'(x) sigma x_j].
double generator_apply(const MspdieProblem& problem, const TestFunction& fn, double t, double x);

struct TestFunctionNd {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  // Row-major d x d Hessian.
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};

double generator_apply_nd(const LevyModel& model, const VectorField& sigma, const TestFunctionNd& fn,
                          std::span<const double> x);

// sum_j lambda_j (phi(x + sigma(x) x_j) - phi(x)) p_k(x_j), 1 <= k <= rank.
double phi1_k(const MspdieProblem& problem, const TeugelsBasis& basis, const TestFunction& fn, int k,
              double t, double x);

// Autonomous noise coefficient g(y) and the flow of dy/db = g(y).
class FlowField {
 public:
  static FlowField zero();
  static FlowField constant(double beta);
  static FlowField linear(double beta);
  // dg and d2g are optional; missing derivatives fall back to central differences.
  static FlowField custom(ScalarFn g, ScalarFn dg = {}, ScalarFn d2g = {});

  double g(double y) const { return g_(y); }
  double dg(double y) const;
  double d2g(double y) const;

  enum class Kind { zero, constant, linear, custom };
  Kind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  bool has_derivatives() const noexcept { return static_cast<bool>(dg_) && static_cast<bool>(d2g_); }

 private:
  FlowField(Kind kind, double beta, ScalarFn g, ScalarFn dg, ScalarFn d2g)
      : kind_(kind), beta_(beta), g_(std::move(g)), dg_(std::move(dg)), d2g_(std::move(d2g)) {}

  Kind kind_;
  double beta_;
  ScalarFn g_;
  ScalarFn dg_;
  ScalarFn d2g_;
};

// Value and derivatives of eta or its inverse at one point. With autonomous g
// the flow does not depend on x, so the x-derivatives are zero.
struct FlowJet {
  double value = 0.0;
  double dy = 1.0;
  double dyy = 0.0;
  double dx = 0.0;
  double dxy = 0.0;
  double dxx = 0.0;
};

// eta(t, x, y) with b = B_T - B_t: the solution at time b of dy/db = g(y).
double flow_eta(const FlowField& flow, double t, double x, double y, double b);
// Inverse of flow_eta in y (the same flow run over -b).
double flow_eps(const FlowField& flow, double t, double x, double y, double b);
FlowJet flow_eta_jet(const FlowField& flow, double t, double x, double y, double b);
FlowJet flow_eps_jet(const FlowField& flow, double t, double x, double y, double b);

struct Jet {
  double a = 0.0;
  double p = 0.0;
  double X = 0.0;
};

enum class JetDirection { u_to_v, v_to_u };

// Moves a (time, space, second-order) jet of u to the jet of v = eps(., ., u)
// or back, evaluating the flow derivatives at `value` (u or v respectively).
Jet jet_transform(const FlowField& flow, JetDirection direction, double t, double x, double value,
                  double b, const Jet& jet);

// theta^k = sum_j lambda_j p sigma(x) x_j p_k(x_j), k = 1..rank.
std::vector<double> theta_vector(const MspdieProblem& problem, const TeugelsBasis& basis, double x,
                                 double p);

// Driver of the equation satisfied by v = eps(t, x, u(t, x)).
double transformed_driver(const FlowField& flow, const MspdieProblem& problem, double t, double x,
                          double y, double b, double p_v, std::span<const double> theta);

struct UEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Per-Brownian-scenario values of Y_t^{t,x}.
  std::vector<double> samples{};
};

// u(t, x) = Y_t^{t,x}: penalised solve with terminal u0(X_T), regression keyed
// on the forward state. The 95% interval is value +- 1.96 s.e.
UEstimate estimate_u(const MspdieProblem& problem, double t, double x, const SolverConfig& config);

}  // namespace levybdsde
