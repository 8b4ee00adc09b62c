#pragma once

#include <cmath>
#include <vector>

namespace oracle {

// Orthonormal polynomials for a discrete measure sum_m w_m delta_{s_m},
// built by Gram-Schmidt on monomial coefficients with the inner product
// evaluated pointwise on the support (no moment matrix involved).
// Returns coefficient rows q_n[0..n]; stops at the first dependent monomial.
inline std::vector<std::vector<double>> discrete_orthonormal(const std::vector<double>& support,
                                                             const std::vector<double>& weight,
                                                             int order) {
  auto eval = [](const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t m = 0; m < support.size(); ++m) s += weight[m] * eval(a, support[m]) * eval(b, support[m]);
    return s;
  };
  std::vector<std::vector<double>> q;
  for (int n = 0; n < order; ++n) {
    std::vector<double> v(n + 1, 0.0);
    v[n] = 1.0;
    const double scale = dot(v, v);
    for (const auto& prev : q) {
      const double c = dot(v, prev);
      for (std::size_t i = 0; i < prev.size(); ++i) v[i] -= c * prev[i];
    }
    const double norm2 = dot(v, v);
    if (norm2 <= 1e-12 * scale) break;
    for (double& c : v) c /= std::sqrt(norm2);
    q.push_back(v);
  }
  return q;
}

}  // namespace oracle
