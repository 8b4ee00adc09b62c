#include "doctest.h"

#include <cmath>
#include <numbers>

#include "levybdsde/errors.hpp"
#include "levybdsde/levy_model.hpp"
#include "oracles/stats.hpp"

using namespace levybdsde;

TEST_CASE("model validation") {
  CHECK_THROWS_AS(LevyModel(0.0, -1.0, {}), ConfigError);
  CHECK_THROWS_AS(LevyModel(0.0, 0.0, {{1.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(LevyModel(0.0, 0.0, {{0.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(LevyModel(0.0, 0.0, {{1.0, 1.0}, {1.0, 2.0}}), ConfigError);
}

TEST_CASE("characteristic exponent") {
  CHECK(char_exponent(LevyModel(0.0, 1.0, {}), 1.0).real() == doctest::Approx(-0.5));
  const auto drift = char_exponent(LevyModel(1.0, 0.0, {}), 2.0);
  CHECK(drift.real() == doctest::Approx(0.0));
  CHECK(drift.imag() == doctest::Approx(2.0));

  // Atom at 1 is not compensated: e^{i pi} - 1 = -2.
  const auto jump = char_exponent(LevyModel(0.0, 0.0, {{1.0, 1.0}}), std::numbers::pi);
  CHECK(jump.real() == doctest::Approx(-2.0));
  CHECK(std::abs(jump.imag()) < 1e-12);

  const LevyModel m(0.2, 0.7, {{-0.4, 1.5}, {1.3, 0.6}});
  for (double u : {-3.0, -0.5, 0.1, 2.0, 7.5}) {
    const auto a = char_exponent(m, -u);
    const auto b = std::conj(char_exponent(m, u));
    CHECK(std::abs(a - b) < 1e-14);
  }
}

TEST_CASE("moments") {
  const LevyModel sym(0.0, 0.0, {{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(nu_moment(sym, 2) == doctest::Approx(1.0));
  CHECK(nu_moment(sym, 3) == doctest::Approx(0.0));
  CHECK(nu_moment(LevyModel(0.0, 1.0, {}), 4) == 0.0);
  CHECK_THROWS(nu_moment(sym, 0));

  CHECK(mean_L1(LevyModel(0.0, 1.0, {})) == 0.0);
  CHECK(mean_L1(LevyModel(0.3, 0.0, {{2.0, 1.0}})) == doctest::Approx(2.3));

  // E L_1 = -i psi'(0); check the small-jump convention numerically.
  const LevyModel small(0.0, 0.0, {{0.5, 4.0}});
  CHECK(mean_L1(small) == 0.0);
  const double h = 1e-5;
  const auto dpsi = (char_exponent(small, h) - char_exponent(small, -h)) / (2.0 * h);
  CHECK(dpsi.imag() == doctest::Approx(mean_L1(small)).epsilon(1e-8));

  const LevyModel m(0.2, 0.7, {{-0.4, 1.5}, {1.3, 0.6}});
  const auto d1 = (char_exponent(m, h) - char_exponent(m, -h)) / (2.0 * h);
  CHECK(d1.imag() == doctest::Approx(mean_L1(m)).epsilon(1e-7));
  const double h2 = 1e-4;
  const auto d2 = (char_exponent(m, h2) - 2.0 * char_exponent(m, 0.0) + char_exponent(m, -h2)) / (h2 * h2);
  CHECK(-d2.real() == doctest::Approx(variance_L1(m)).epsilon(1e-5));
}

TEST_CASE("pure drift paths are deterministic") {
  const TimeGrid grid(0.0, 1.0, 10);
  const auto paths = simulate_paths(LevyModel(1.0, 0.0, {}), grid, 3, 7);
  for (const auto& p : paths)
    for (double dl : p.dL) CHECK(dl == doctest::Approx(0.1));
}

TEST_CASE("jump bookkeeping") {
  const LevyModel m(0.1, 0.5, {{-0.3, 3.0}, {1.2, 2.0}});
  const TimeGrid grid(0.0, 2.0, 16);
  for (const auto& p : simulate_paths(m, grid, 50, 11)) {
    double sum = 0.0;
    for (double dl : p.dL) sum += dl;
    CHECK(sum == p.levy_terminal());
    for (std::size_t i = 1; i < p.jumps.size(); ++i) CHECK(p.jumps[i - 1].time <= p.jumps[i].time);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      double jumps = 0.0;
      for (const auto& j : p.jumps_in_step(k)) {
        CHECK(j.time > grid.node(k));
        CHECK(j.time < grid.node(k + 1));
        jumps += j.size;
      }
      CHECK(p.dL[k] == doctest::Approx(p.dC[k] + jumps).epsilon(1e-14));
    }
  }
}

TEST_CASE("reproducible and worker independent") {
  const LevyModel m(0.1, 0.5, {{-0.3, 3.0}});
  const TimeGrid grid(0.0, 1.0, 8);
  const auto a = simulate_paths(m, grid, 20, 5, 1);
  const auto b = simulate_paths(m, grid, 20, 5, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].dL == b[i].dL);
    CHECK(a[i].dB == b[i].dB);
  }
  CHECK_THROWS_AS(simulate_paths(m, grid, 0, 5), ConfigError);
}

TEST_CASE("Monte Carlo laws") {
  const TimeGrid grid(0.0, 1.0, 4);
  SUBCASE("Poisson jump count") {
    const auto paths = simulate_paths(LevyModel(0.0, 0.0, {{1.0, 2.0}}), grid, 100000, 3);
    std::vector<double> n;
    for (const auto& p : paths) n.push_back(static_cast<double>(p.jumps.size()));
    const auto mom = oracle::moments(n);
    CHECK(std::abs(mom.mean - 2.0) < 3.0 * mom.se);
  }
  SUBCASE("mean and variance of L_T") {
    const LevyModel m(0.2, 0.7, {{-0.4, 1.5}, {1.3, 0.6}});
    const auto paths = simulate_paths(m, grid, 100000, 4);
    std::vector<double> l, sq;
    for (const auto& p : paths) l.push_back(p.levy_terminal());
    const auto mom = oracle::moments(l);
    CHECK(std::abs(mom.mean - mean_L1(m)) < 3.0 * mom.se);
    for (double x : l) sq.push_back((x - mean_L1(m)) * (x - mean_L1(m)));
    const auto v = oracle::moments(sq);
    CHECK(std::abs(v.mean - variance_L1(m)) < 3.0 * v.se);
  }
  SUBCASE("Brownian case passes Kolmogorov-Smirnov") {
    const TimeGrid g2(0.0, 2.0, 4);
    const auto paths = simulate_paths(LevyModel(0.0, 1.0, {}), g2, 10000, 6);
    std::vector<double> z;
    for (const auto& p : paths) z.push_back(p.levy_terminal() / std::sqrt(2.0));
    CHECK(oracle::ks_normal(z) < 1.628 / std::sqrt(10000.0));
  }
}
