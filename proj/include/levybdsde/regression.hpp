#pragma once

#include <memory>
#include <span>
#include <vector>

namespace levybdsde {

// Least-squares projection onto polynomials of a scalar state, used for the
// Markovian conditional expectations. The design is factorised once and
// reused for every target regressed at the same time step.
class PolynomialProjector {
 public:
  // Degree is capped at (number of distinct states - 1); a design that is
  // still rank deficient after the cap raises NumericalError.
  PolynomialProjector(std::span<const double> states, int degree);
  ~PolynomialProjector();
  PolynomialProjector(PolynomialProjector&&) noexcept;
  PolynomialProjector& operator=(PolynomialProjector&&) noexcept;

  int effective_degree() const noexcept { return degree_; }

  // Fitted values of `target` at the training states.
  std::vector<double> project(std::span<const double> target) const;

 private:
  struct Impl;
  int degree_ = 0;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace levybdsde
