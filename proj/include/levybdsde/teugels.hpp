#pragma once

#include <cstddef>
#include <vector>

#include "levybdsde/levy_model.hpp"

namespace levybdsde {

// Polynomial in monomial form: coeffs[n] multiplies x^n.
struct Polynomial {
  std::vector<double> coeffs;

  double operator()(double x) const noexcept;
  std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

// p_k(x) = x q_{k-1}(x); p_k(0) = 0 by construction.
struct PkFunction {
  int k = 0;
  Polynomial poly;

  double operator()(double x) const noexcept { return poly(x); }
};

// Orthonormal polynomials q_0..q_{R-1} under mu(dx) = x^2 nu(dx) + kappa^2 delta_0(dx)
// and the Teugels martingales H^(i) = sum_k c_{i,k} Y^(k) they define.
class TeugelsBasis {
 public:
  TeugelsBasis(int requested_order, std::vector<std::vector<double>> coeffs,
               std::vector<double> mu_moments);

  int requested_order() const noexcept { return requested_order_; }
  int rank() const noexcept { return static_cast<int>(coeffs_.size()); }

  // c_{i,k}, 1 <= k <= i <= rank; zero above the diagonal.
  double coeff(int i, int k) const;
  const std::vector<std::vector<double>>& coeffs() const noexcept { return coeffs_; }
  const std::vector<double>& mu_moments() const noexcept { return mu_moments_; }

  // q_n for 0 <= n < rank. Orders in [rank, requested_order) are the
  // degenerate (identically zero in L^2(mu)) part of the chaos.
  Polynomial q(int n) const;
  PkFunction p(int k) const;

  // G_{nm} = int q_n q_m dmu from the stored moments.
  std::vector<std::vector<double>> gram() const;
  double gram_residual() const;

 private:
  int requested_order_;
  std::vector<std::vector<double>> coeffs_;  // coeffs_[i-1][k-1] = c_{i,k}
  std::vector<double> mu_moments_;
};

// int x^n mu(dx) = sum_j lambda_j x_j^{n+2} + kappa^2 [n == 0].
double mu_moment(const LevyModel& model, int n);

// Gram-Schmidt on 1, x, x^2, ... under mu using exact moment arithmetic.
// A monomial whose residual norm^2 falls below pivot_tol (relative to its own
// norm^2) is linearly dependent on the previous ones in L^2(mu); the rank is
// fixed there.
TeugelsBasis orthonormalize(const LevyModel& model, int order, double pivot_tol = 1e-12);

// Fills bundle.dH (rank rows): dH^(i)_k = sum_m c_{i,m} (dL^(m)_k - E[L_1^(m)] dt).
void h_increments(const TeugelsBasis& basis, const LevyModel& model, PathBundle& bundle);

// Increment of H^(i) over step k. Indices rank < i <= requested_order are the
// degenerate martingales and return exactly 0; other indices throw.
double martingale_increment(const TeugelsBasis& basis, const PathBundle& bundle, int i,
                            std::size_t k);

// H^(i) at the end of the grid (sum of its increments).
double martingale_terminal(const TeugelsBasis& basis, const PathBundle& bundle, int i);

// Realised covariation [H^(i), H^(j)]_T = sum_jumps p_i p_j + kappa^2 q_{i-1}(0) q_{j-1}(0) T.
std::vector<std::vector<double>> realized_covariation(const TeugelsBasis& basis,
                                                      const LevyModel& model,
                                                      const PathBundle& bundle);

// E[L_1^(m)]: mean_L1 for m = 1, nu_moment(m) otherwise.
double power_jump_mean(const LevyModel& model, int m);

}  // namespace levybdsde
