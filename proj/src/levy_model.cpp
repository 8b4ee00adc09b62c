#include "levybdsde/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levybdsde/errors.hpp"
#include "levybdsde/parallel.hpp"
#include "levybdsde/random.hpp"

namespace levybdsde {

namespace {

bool is_small_jump(double x) { return std::abs(x) < 1.0; }

}  // namespace

LevyModel::LevyModel(double drift, double gaussian_kappa, std::vector<Atom> atoms,
                     double exp_moment_lambda)
    : drift_(drift), kappa_(gaussian_kappa), atoms_(std::move(atoms)),
      exp_moment_lambda_(exp_moment_lambda) {
  if (!std::isfinite(drift_)) throw ConfigError("levy_model", "drift must be finite");
  if (!(kappa_ >= 0.0) || !std::isfinite(kappa_))
    throw ConfigError("levy_model", "gaussian kappa must be finite and >= 0");
  if (!(exp_moment_lambda_ > 0.0))
    throw ConfigError("levy_model", "exponential-moment lambda must be > 0");
  for (const auto& a : atoms_) {
    if (!(a.intensity > 0.0) || !std::isfinite(a.intensity))
      throw ConfigError("levy_model", "atom intensity must be finite and > 0");
    if (a.size == 0.0 || !std::isfinite(a.size))
      throw ConfigError("levy_model", "atom jump size must be finite and non-zero");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = i + 1; j < atoms_.size(); ++j)
      if (atoms_[i].size == atoms_[j].size)
        throw ConfigError("levy_model", "atom jump sizes must be pairwise distinct");
}

double LevyModel::total_intensity() const noexcept {
  return std::accumulate(atoms_.begin(), atoms_.end(), 0.0,
                         [](double s, const Atom& a) { return s + a.intensity; });
}

double LevyModel::continuous_drift() const noexcept {
  double c = drift_;
  for (const auto& a : atoms_)
    if (is_small_jump(a.size)) c -= a.intensity * a.size;
  return c;
}

double LevyModel::exp_moment() const noexcept {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.intensity * std::exp(exp_moment_lambda_ * std::abs(a.size));
  return s;
}

std::complex<double> char_exponent(const LevyModel& model, double u) {
  using namespace std::complex_literals;
  std::complex<double> psi = 1i * model.drift() * u - 0.5 * model.kappa() * model.kappa() * u * u;
  for (const auto& a : model.atoms()) {
    std::complex<double> term = std::exp(1i * u * a.size) - 1.0;
    if (is_small_jump(a.size)) term -= 1i * u * a.size;
    psi += a.intensity * term;
  }
  return psi;
}

double nu_moment(const LevyModel& model, int i) {
  if (i < 1) throw ConfigError("levy_model", "nu_moment order must be >= 1");
  double s = 0.0;
  for (const auto& a : model.atoms()) s += a.intensity * std::pow(a.size, i);
  return s;
}

double mean_L1(const LevyModel& model) {
  double m = model.drift();
  for (const auto& a : model.atoms())
    if (!is_small_jump(a.size)) m += a.intensity * a.size;
  return m;
}

double variance_L1(const LevyModel& model) {
  return model.kappa() * model.kappa() + nu_moment(model, 2);
}

TimeGrid::TimeGrid(double t0_, double T_, std::size_t n) : t0(t0_), T(T_), n_steps(n) {
  if (!(t0 < T)) throw ConfigError("levy_model", "time grid needs t0 < T");
  if (n_steps < 1) throw ConfigError("levy_model", "time grid needs at least one step");
}

std::size_t TimeGrid::step_of(double s) const noexcept {
  const double pos = (s - t0) / dt();
  if (pos <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  return std::min(k, n_steps - 1);
}

std::span<const Jump> PathBundle::jumps_in_step(std::size_t k) const {
  return std::span<const Jump>(jumps).subspan(jump_offsets[k], jump_offsets[k + 1] - jump_offsets[k]);
}

double PathBundle::levy_terminal() const noexcept {
  double s = 0.0;
  for (double v : dL) s += v;
  return s;
}

double PathBundle::brownian_terminal() const noexcept {
  double s = 0.0;
  for (double v : dB) s += v;
  return s;
}

void simulate_levy(const LevyModel& model, PathBundle& bundle, std::mt19937_64& rng) {
  const auto& grid = bundle.grid;
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double horizon = grid.T - grid.t0;

  std::normal_distribution<double> normal(0.0, 1.0);
  bundle.dW.resize(n);
  bundle.dC.resize(n);
  const double drift_step = model.continuous_drift() * dt;
  for (std::size_t k = 0; k < n; ++k) {
    bundle.dW[k] = model.kappa() > 0.0 ? sqrt_dt * normal(rng) : 0.0;
    bundle.dC[k] = drift_step + model.kappa() * bundle.dW[k];
  }

  // Jumps of each atom form an independent Poisson process: draw the count
  // over the horizon, then uniform arrival times.
  bundle.jumps.clear();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& a : model.atoms()) {
    std::poisson_distribution<long> count_dist(a.intensity * horizon);
    const long count = count_dist(rng);
    for (long c = 0; c < count; ++c) {
      const double s = grid.t0 + horizon * uniform(rng);
      bundle.jumps.push_back({s, a.size, grid.step_of(s)});
    }
  }
  std::sort(bundle.jumps.begin(), bundle.jumps.end(),
            [](const Jump& x, const Jump& y) { return x.time < y.time; });

  bundle.jump_offsets.assign(n + 1, 0);
  for (const auto& j : bundle.jumps) ++bundle.jump_offsets[j.step + 1];
  for (std::size_t k = 0; k < n; ++k) bundle.jump_offsets[k + 1] += bundle.jump_offsets[k];

  bundle.dL.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double jump_sum = 0.0;
    for (const auto& j : bundle.jumps_in_step(k)) jump_sum += j.size;
    bundle.dL[k] = bundle.dC[k] + jump_sum;
  }
  bundle.dH.clear();
}

void simulate_brownian(PathBundle& bundle, std::mt19937_64& rng) {
  const double sqrt_dt = std::sqrt(bundle.grid.dt());
  std::normal_distribution<double> normal(0.0, 1.0);
  bundle.dB.resize(bundle.grid.n_steps);
  for (auto& v : bundle.dB) v = sqrt_dt * normal(rng);
}

PathBundle simulate_path(const LevyModel& model, const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t index) {
  PathBundle bundle(grid);
  auto rng_b = make_rng(seed, Stream::brownian, index);
  simulate_brownian(bundle, rng_b);
  auto rng_l = make_rng(seed, Stream::levy, index);
  simulate_levy(model, bundle, rng_l);
  return bundle;
}

std::vector<PathBundle> simulate_paths(const LevyModel& model, const TimeGrid& grid,
                                       std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  if (n_paths < 1) throw ConfigError("levy_model", "n_paths must be >= 1");
  std::vector<PathBundle> out(n_paths, PathBundle(grid));
  parallel_for(n_paths, workers, [&](std::size_t i) { out[i] = simulate_path(model, grid, seed, i); });
  return out;
}

}  // namespace levybdsde
