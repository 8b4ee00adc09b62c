#include "levybdsde/teugels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levybdsde/errors.hpp"

namespace levybdsde {

double Polynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

TeugelsBasis::TeugelsBasis(int requested_order, std::vector<std::vector<double>> coeffs,
                           std::vector<double> mu_moments)
    : requested_order_(requested_order), coeffs_(std::move(coeffs)),
      mu_moments_(std::move(mu_moments)) {
  if (requested_order_ < 1) throw ConfigError("teugels", "requested order must be >= 1");
  if (rank() > requested_order_) throw ConfigError("teugels", "rank exceeds requested order");
  for (int i = 1; i <= rank(); ++i) {
    if (static_cast<int>(coeffs_[i - 1].size()) != i)
      throw ConfigError("teugels", "coefficient row " + std::to_string(i) + " has wrong length");
    if (!(coeffs_[i - 1][i - 1] > 0.0))
      throw ConfigError("teugels", "leading coefficients must be positive");
  }
}

double TeugelsBasis::coeff(int i, int k) const {
  if (i < 1 || i > rank() || k < 1)
    throw std::out_of_range("teugels: coefficient index out of range");
  return k > i ? 0.0 : coeffs_[i - 1][k - 1];
}

Polynomial TeugelsBasis::q(int n) const {
  if (n < 0 || n >= requested_order_)
    throw std::out_of_range("teugels: polynomial index beyond requested order");
  if (n >= rank()) return Polynomial{{0.0}};
  return Polynomial{coeffs_[n]};
}

PkFunction TeugelsBasis::p(int k) const {
  const Polynomial qk = q(k - 1);
  PkFunction out{k, Polynomial{std::vector<double>(qk.coeffs.size() + 1, 0.0)}};
  std::copy(qk.coeffs.begin(), qk.coeffs.end(), out.poly.coeffs.begin() + 1);
  return out;
}

std::vector<std::vector<double>> TeugelsBasis::gram() const {
  const int r = rank();
  std::vector<std::vector<double>> g(r, std::vector<double>(r, 0.0));
  for (int n = 0; n < r; ++n)
    for (int m = 0; m < r; ++m) {
      long double s = 0.0L;
      for (std::size_t a = 0; a < coeffs_[n].size(); ++a)
        for (std::size_t b = 0; b < coeffs_[m].size(); ++b)
          s += static_cast<long double>(coeffs_[n][a]) * coeffs_[m][b] * mu_moments_[a + b];
      g[n][m] = static_cast<double>(s);
    }
  return g;
}

double TeugelsBasis::gram_residual() const {
  const auto g = gram();
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    for (std::size_t m = 0; m < g.size(); ++m)
      worst = std::max(worst, std::abs(g[n][m] - (n == m ? 1.0 : 0.0)));
  return worst;
}

double mu_moment(const LevyModel& model, int n) {
  if (n < 0) throw ConfigError("teugels", "mu_moment order must be >= 0");
  double s = n == 0 ? model.kappa() * model.kappa() : 0.0;
  for (const auto& a : model.atoms()) s += a.intensity * std::pow(a.size, n + 2);
  return s;
}

TeugelsBasis orthonormalize(const LevyModel& model, int order, double pivot_tol) {
  if (order < 1) throw ConfigError("teugels", "order K must be >= 1");
  if (!(pivot_tol > 0.0)) throw ConfigError("teugels", "pivot tolerance must be > 0");

  std::vector<double> moments(2 * order + 1);
  for (int n = 0; n <= 2 * order; ++n) moments[n] = mu_moment(model, n);
  if (!(moments[0] > 0.0))
    throw ConfigError("teugels", "mu is the zero measure (kappa = 0 and no atoms): no basis exists");

  using Poly = std::vector<long double>;
  auto inner = [&](const Poly& a, const Poly& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * b[j] * moments[i + j];
    return s;
  };

  std::vector<Poly> basis;
  for (int n = 0; n < order; ++n) {
    const long double norm0 = moments[2 * n];
    if (!(norm0 > 0.0L)) break;
    Poly v(n + 1, 0.0L);
    v[n] = 1.0L;
    // Two sweeps of modified Gram-Schmidt recover the orthogonality lost to
    // cancellation when the Hankel matrix is badly conditioned.
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const auto& qj : basis) {
        const long double proj = inner(v, qj);
        for (std::size_t a = 0; a < qj.size(); ++a) v[a] -= proj * qj[a];
      }
    const long double residual = inner(v, v);
    if (!(residual > static_cast<long double>(pivot_tol) * norm0)) break;
    const long double scale = 1.0L / std::sqrt(residual);
    for (auto& c : v) c *= scale;
    basis.push_back(std::move(v));
  }

  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(basis.size());
  for (const auto& b : basis) coeffs.emplace_back(b.begin(), b.end());
  return TeugelsBasis(order, std::move(coeffs), std::move(moments));
}

double power_jump_mean(const LevyModel& model, int m) {
  return m == 1 ? mean_L1(model) : nu_moment(model, m);
}

void h_increments(const TeugelsBasis& basis, const LevyModel& model, PathBundle& bundle) {
  const auto& stored = basis.mu_moments();
  for (std::size_t n = 0; n < stored.size(); ++n) {
    const double expected = mu_moment(model, static_cast<int>(n));
    if (std::abs(expected - stored[n]) > 1e-12 * std::max(1.0, std::abs(expected)))
      throw ConfigError("teugels", "basis was built from a different Levy model");
  }
  if (bundle.dL.size() != bundle.grid.n_steps)
    throw ConfigError("teugels", "path bundle has no simulated Levy increments");

  const int r = basis.rank();
  const std::size_t n = bundle.grid.n_steps;
  const double dt = bundle.grid.dt();
  std::vector<double> compensator(r);
  for (int m = 1; m <= r; ++m) compensator[m - 1] = power_jump_mean(model, m) * dt;

  bundle.dH.assign(r, std::vector<double>(n, 0.0));
  std::vector<double> power(r);
  for (std::size_t k = 0; k < n; ++k) {
    power[0] = bundle.dL[k];
    for (int m = 2; m <= r; ++m) {
      double s = 0.0;
      for (const auto& j : bundle.jumps_in_step(k)) s += std::pow(j.size, m);
      power[m - 1] = s;
    }
    for (int i = 1; i <= r; ++i) {
      double h = 0.0;
      for (int m = 1; m <= i; ++m) h += basis.coeff(i, m) * (power[m - 1] - compensator[m - 1]);
      bundle.dH[i - 1][k] = h;
    }
  }
}

double martingale_increment(const TeugelsBasis& basis, const PathBundle& bundle, int i,
                            std::size_t k) {
  if (i < 1 || i > basis.requested_order())
    throw std::out_of_range("teugels: martingale index " + std::to_string(i) +
                            " outside 1.." + std::to_string(basis.requested_order()));
  if (i > basis.rank()) return 0.0;
  if (static_cast<int>(bundle.dH.size()) != basis.rank())
    throw ConfigError("teugels", "bundle increments do not match the basis rank");
  return bundle.dH[i - 1].at(k);
}

double martingale_terminal(const TeugelsBasis& basis, const PathBundle& bundle, int i) {
  double s = 0.0;
  for (std::size_t k = 0; k < bundle.grid.n_steps; ++k) s += martingale_increment(basis, bundle, i, k);
  return s;
}

std::vector<std::vector<double>> realized_covariation(const TeugelsBasis& basis,
                                                      const LevyModel& model,
                                                      const PathBundle& bundle) {
  const int r = basis.rank();
  std::vector<PkFunction> p;
  std::vector<double> q_at_zero;
  for (int i = 1; i <= r; ++i) {
    p.push_back(basis.p(i));
    q_at_zero.push_back(basis.q(i - 1)(0.0));
  }
  const double horizon = bundle.grid.T - bundle.grid.t0;
  const double k2 = model.kappa() * model.kappa();
  std::vector<std::vector<double>> cov(r, std::vector<double>(r, 0.0));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      double s = k2 * q_at_zero[i] * q_at_zero[j] * horizon;
      for (const auto& jump : bundle.jumps) s += p[i](jump.size) * p[j](jump.size);
      cov[i][j] = s;
    }
  return cov;
}

}  // namespace levybdsde
