#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace levybdsde {

// Value used for phi outside its effective domain.
inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
  double lo = -kInfinite;
  double hi = kInfinite;

  bool contains(double v, double tol = 0.0) const noexcept { return v >= lo - tol && v <= hi + tol; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
  double distance(double v) const noexcept { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); }
};

// Proper lsc convex phi: R -> [0, +inf] with phi(0) = 0. One-sided derivatives
// are only queried inside the domain.
class ConvexFunction {
 public:
  using Scalar = std::function<double(double)>;
  // (eps, x) -> J_eps(x) = (I + eps d phi)^{-1}(x)
  using Prox = std::function<double(double, double)>;

  ConvexFunction(std::string name, Scalar eval, Interval domain, Scalar left_deriv,
                 Scalar right_deriv, Prox closed_form_prox = {});

  static ConvexFunction zero();
  static ConvexFunction quadratic();  // y^2 / 2
  static ConvexFunction abs();
  // Indicator of (-inf, c], c >= 0.
  static ConvexFunction half_line_upper(double c = 0.0);
  // Indicator of [c, +inf), c <= 0.
  static ConvexFunction half_line_lower(double c = 0.0);
  // Indicator of [l, r] with l <= 0 <= r.
  static ConvexFunction interval(double l, double r);

  const std::string& name() const noexcept { return name_; }
  double operator()(double y) const;
  const Interval& domain() const noexcept { return domain_; }
  bool in_domain(double y) const noexcept { return domain_.contains(y); }
  bool is_indicator() const noexcept { return indicator_; }

  double left_derivative(double y) const { return left_(y); }
  double right_derivative(double y) const { return right_(y); }

  bool has_closed_form_prox() const noexcept { return static_cast<bool>(prox_); }
  const Prox& closed_form_prox() const noexcept { return prox_; }

  // Copy with the closed-form resolvent removed, forcing the bisection route.
  ConvexFunction without_closed_form() const;

 private:
  static ConvexFunction make_indicator(std::string name, double l, double r);

  std::string name_;
  Scalar eval_;
  Interval domain_;
  Scalar left_;
  Scalar right_;
  Prox prox_;
  bool indicator_ = false;
};

// J_eps(x): closed form when available, monotone bisection otherwise.
double resolvent(const ConvexFunction& phi, double eps, double x);

// Always bisects y -> y + eps * d phi(y) to 1e-12 (at most 200 halvings).
double resolvent_bisection(const ConvexFunction& phi, double eps, double x);

// D phi_eps(x) = x - J_eps(x). The penalisation drift is (1/eps) D phi_eps.
double yosida_grad(const ConvexFunction& phi, double eps, double x);

// phi_eps(x) = |x - J_eps(x)|^2 / 2 + eps phi(J_eps(x)) = min_y (|x-y|^2/2 + eps phi(y)).
double yosida_value(const ConvexFunction& phi, double eps, double x);

// [phi'_l(y), phi'_r(y)], widened by the normal cone at domain endpoints.
// Empty (nullopt) outside the domain.
std::optional<Interval> subdiff(const ConvexFunction& phi, double y);

}  // namespace levybdsde
