#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace levybdsde {

// One atom of a finite-activity Levy measure: jumps of `size` arriving at
// rate `intensity`.
struct Atom {
  double size = 0.0;
  double intensity = 0.0;
};

// Levy process with characteristic exponent
//   psi(u) = i a u - kappa^2 u^2 / 2 + sum_j lambda_j (e^{i u x_j} - 1 - i u x_j 1{|x_j| < 1})
// and an atomic Levy measure. Immutable after construction.
class LevyModel {
 public:
  LevyModel(double drift, double gaussian_kappa, std::vector<Atom> atoms,
            double exp_moment_lambda = 1.0);

  static LevyModel brownian(double kappa = 1.0) { return LevyModel(0.0, kappa, {}); }

  double drift() const noexcept { return drift_; }
  double kappa() const noexcept { return kappa_; }
  double exp_moment_lambda() const noexcept { return exp_moment_lambda_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  bool has_jumps() const noexcept { return !atoms_.empty(); }

  double total_intensity() const noexcept;

  // Drift of the continuous part once the small jumps (|x| < 1) are
  // compensated: a - sum_{|x_j|<1} lambda_j x_j.
  double continuous_drift() const noexcept;

  // Value of the exponential-moment integral, finite for any atomic measure.
  double exp_moment() const noexcept;

 private:
  double drift_;
  double kappa_;
  std::vector<Atom> atoms_;
  double exp_moment_lambda_;
};

std::complex<double> char_exponent(const LevyModel& model, double u);

// int x^i nu(dx) as an exact atomic sum.
double nu_moment(const LevyModel& model, int i);

// E[L_1] = a + sum_{|x_j| >= 1} lambda_j x_j.
double mean_L1(const LevyModel& model);

// Var[L_1] = kappa^2 + sum_j lambda_j x_j^2.
double variance_L1(const LevyModel& model);

// Uniform grid t0 = s_0 < ... < s_n = T.
struct TimeGrid {
  TimeGrid(double t0, double T, std::size_t n_steps);

  double t0;
  double T;
  std::size_t n_steps;

  double dt() const noexcept { return (T - t0) / static_cast<double>(n_steps); }
  double node(std::size_t k) const noexcept {
    return k == n_steps ? T : t0 + static_cast<double>(k) * dt();
  }
  // Index of the step containing time s (the last step owns T).
  std::size_t step_of(double s) const noexcept;
};

struct Jump {
  double time = 0.0;
  double size = 0.0;
  std::size_t step = 0;
};

// One joint realisation of the Brownian motion B and the Levy process L on a
// grid. dH is left empty by the simulator and filled by `h_increments`.
struct PathBundle {
  explicit PathBundle(TimeGrid g) : grid(g) {}

  TimeGrid grid;
  std::vector<double> dB;
  std::vector<double> dW;
  // Continuous part of dL: continuous_drift * dt + kappa * dW.
  std::vector<double> dC;
  std::vector<double> dL;
  std::vector<Jump> jumps;
  // jump_offsets[k] .. jump_offsets[k+1] indexes the jumps of step k.
  std::vector<std::size_t> jump_offsets;
  // dH[i-1][k]: increment of the i-th Teugels martingale over step k.
  std::vector<std::vector<double>> dH;

  std::size_t n_steps() const noexcept { return grid.n_steps; }
  std::span<const Jump> jumps_in_step(std::size_t k) const;
  std::size_t jump_count(std::size_t k) const { return jumps_in_step(k).size(); }

  // L_T - L_{t0}, accumulated from dL in step order.
  double levy_terminal() const noexcept;
  double brownian_terminal() const noexcept;
};

// Levy part only (dW, dC, dL, jumps); B is left empty.
void simulate_levy(const LevyModel& model, PathBundle& bundle, std::mt19937_64& rng);

// Brownian increments of B only.
void simulate_brownian(PathBundle& bundle, std::mt19937_64& rng);

// Path `index` of the family generated from `seed`; B and L use separate
// streams so that either can be resampled while the other is held fixed.
PathBundle simulate_path(const LevyModel& model, const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t index);

std::vector<PathBundle> simulate_paths(const LevyModel& model, const TimeGrid& grid,
                                       std::size_t n_paths, std::uint64_t seed,
                                       unsigned workers = 1);

}  // namespace levybdsde
