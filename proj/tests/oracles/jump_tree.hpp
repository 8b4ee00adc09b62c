#pragma once

#include <cmath>
#include <functional>

namespace oracle {

// E[h(X_T)] for X_{k+1} = X_k (1 + size)^{n_k} with n_k ~ Poisson(rate dt)
// truncated at max_jumps per step (no renormalisation), summed over every
// jump-count history.
inline double geometric_jump_mean(double x, double size, double rate, double T, int steps, int max_jumps,
                                  const std::function<double(double)>& h) {
  const double dt = T / steps;
  std::function<double(int, double)> rec = [&](int k, double state) {
    if (k == steps) return h(state);
    double sum = 0.0;
    for (int n = 0; n <= max_jumps; ++n) {
      const double p = std::exp(-rate * dt) * std::pow(rate * dt, n) / std::tgamma(n + 1.0);
      sum += p * rec(k + 1, state * std::pow(1.0 + size, n));
    }
    return sum;
  };
  return rec(0, x);
}

}  // namespace oracle
