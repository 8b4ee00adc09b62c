#include "levybdsde/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "levybdsde/errors.hpp"

namespace levybdsde {

struct PolynomialProjector::Impl {
  Eigen::MatrixXd design;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

namespace {

int count_distinct(std::span<const double> x, double scale, int cap) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  int distinct = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size() && distinct < cap; ++i)
    if (sorted[i] - sorted[i - 1] > 1e-12 * scale) ++distinct;
  return distinct;
}

}  // namespace

PolynomialProjector::PolynomialProjector(std::span<const double> states, int degree)
    : n_(states.size()) {
  if (degree < 0) throw ConfigError("bdsde_solver", "regression degree must be >= 0");
  if (states.empty()) throw ConfigError("bdsde_solver", "regression needs at least one sample");

  double mean = 0.0;
  for (double v : states) mean += v;
  mean /= static_cast<double>(n_);
  double var = 0.0;
  for (double v : states) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n_));
  const double scale = std::max(1.0, std::abs(mean) + sd);

  degree_ = sd > 0.0 ? std::min(degree, count_distinct(states, scale, degree + 1) - 1) : 0;
  if (degree_ == 0) return;

  impl_ = std::make_unique<Impl>();
  impl_->design.resize(static_cast<Eigen::Index>(n_), degree_ + 1);
  for (std::size_t i = 0; i < n_; ++i) {
    const double z = (states[i] - mean) / sd;
    double pw = 1.0;
    for (int d = 0; d <= degree_; ++d) {
      impl_->design(static_cast<Eigen::Index>(i), d) = pw;
      pw *= z;
    }
  }
  impl_->qr.setThreshold(1e-10);
  impl_->qr.compute(impl_->design);
  if (impl_->qr.rank() < degree_ + 1)
    throw NumericalError("bdsde_solver", "regression design matrix is rank deficient");
}

PolynomialProjector::~PolynomialProjector() = default;
PolynomialProjector::PolynomialProjector(PolynomialProjector&&) noexcept = default;
PolynomialProjector& PolynomialProjector::operator=(PolynomialProjector&&) noexcept = default;

std::vector<double> PolynomialProjector::project(std::span<const double> target) const {
  if (target.size() != n_) throw ConfigError("bdsde_solver", "regression target has wrong length");
  if (degree_ == 0) {
    double mean = 0.0;
    for (double v : target) mean += v;
    mean /= static_cast<double>(n_);
    return std::vector<double>(n_, mean);
  }
  const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(n_));
  const Eigen::VectorXd beta = impl_->qr.solve(y);
  const Eigen::VectorXd fitted = impl_->design * beta;
  return std::vector<double>(fitted.data(), fitted.data() + fitted.size());
}

}  // namespace levybdsde
