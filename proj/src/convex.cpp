#include "levybdsde/convex.hpp"

#include <algorithm>
#include <cmath>

#include "levybdsde/errors.hpp"

namespace levybdsde {

namespace {

constexpr double kBisectionTol = 1e-12;
constexpr int kMaxBisection = 200;
constexpr int kMaxExpansion = 200;

}  // namespace

ConvexFunction ConvexFunction::make_indicator(std::string name, double l, double r) {
  const Interval dom{l, r};
  auto eval = [dom](double y) { return dom.contains(y) ? 0.0 : kInfinite; };
  auto left = [dom](double y) { return y == dom.lo ? -kInfinite : 0.0; };
  auto right = [dom](double y) { return y == dom.hi ? kInfinite : 0.0; };
  auto prox = [dom](double, double x) { return dom.clamp(x); };
  ConvexFunction phi(std::move(name), eval, dom, left, right, prox);
  phi.indicator_ = true;
  return phi;
}

ConvexFunction::ConvexFunction(std::string name, Scalar eval, Interval domain, Scalar left_deriv,
                               Scalar right_deriv, Prox closed_form_prox)
    : name_(std::move(name)), eval_(std::move(eval)), domain_(domain), left_(std::move(left_deriv)),
      right_(std::move(right_deriv)), prox_(std::move(closed_form_prox)) {
  if (!eval_ || !left_ || !right_) throw ConfigError("convex", name_ + ": missing evaluator");
  if (!(domain_.lo <= domain_.hi)) throw ConfigError("convex", name_ + ": empty domain");
  if (!domain_.contains(0.0)) throw ConfigError("convex", name_ + ": 0 must lie in the domain");
  if (eval_(0.0) != 0.0) throw ConfigError("convex", name_ + ": phi(0) must equal 0");
}

ConvexFunction ConvexFunction::zero() {
  auto z = [](double) { return 0.0; };
  return ConvexFunction("zero", z, Interval{}, z, z, [](double, double x) { return x; });
}

ConvexFunction ConvexFunction::quadratic() {
  auto id = [](double y) { return y; };
  return ConvexFunction("quadratic", [](double y) { return 0.5 * y * y; }, Interval{}, id, id,
                        [](double eps, double x) { return x / (1.0 + eps); });
}

ConvexFunction ConvexFunction::abs() {
  return ConvexFunction(
      "abs", [](double y) { return std::abs(y); }, Interval{},
      [](double y) { return y > 0.0 ? 1.0 : -1.0; }, [](double y) { return y < 0.0 ? -1.0 : 1.0; },
      [](double eps, double x) { return std::copysign(std::max(std::abs(x) - eps, 0.0), x); });
}

ConvexFunction ConvexFunction::half_line_upper(double c) {
  if (!(c >= 0.0)) throw ConfigError("convex", "half_line (-inf, c] needs c >= 0");
  return make_indicator("half_line_upper", -kInfinite, c);
}

ConvexFunction ConvexFunction::half_line_lower(double c) {
  if (!(c <= 0.0)) throw ConfigError("convex", "half_line [c, inf) needs c <= 0");
  return make_indicator("half_line_lower", c, kInfinite);
}

ConvexFunction ConvexFunction::interval(double l, double r) {
  if (!(l <= 0.0 && 0.0 <= r)) throw ConfigError("convex", "interval [l, r] must contain 0");
  return make_indicator("interval", l, r);
}

ConvexFunction ConvexFunction::without_closed_form() const {
  ConvexFunction copy = *this;
  copy.prox_ = {};
  return copy;
}

double ConvexFunction::operator()(double y) const {
  if (!domain_.contains(y)) return kInfinite;
  return eval_(y);
}

std::optional<Interval> subdiff(const ConvexFunction& phi, double y) {
  if (!phi.in_domain(y)) return std::nullopt;
  Interval s{phi.left_derivative(y), phi.right_derivative(y)};
  if (y == phi.domain().lo) s.lo = -kInfinite;
  if (y == phi.domain().hi) s.hi = kInfinite;
  return s;
}

double resolvent_bisection(const ConvexFunction& phi, double eps, double x) {
  if (!(eps > 0.0)) throw ConfigError("convex", "resolvent needs eps > 0");
  const Interval& dom = phi.domain();
  if (!(dom.lo <= dom.hi)) throw NumericalError("convex", "resolvent of a function with empty domain");

  // y solves the inclusion iff y + eps*phi'_l(y) <= x <= y + eps*phi'_r(y).
  auto above = [&](double y) { return y + eps * subdiff(phi, y)->lo > x; };
  auto below = [&](double y) { return y + eps * subdiff(phi, y)->hi < x; };

  const double xc = dom.clamp(x);
  const auto s = *subdiff(phi, xc);
  const double gl = std::isfinite(s.lo) ? std::abs(s.lo) : 0.0;
  const double gr = std::isfinite(s.hi) ? std::abs(s.hi) : 0.0;
  double lo = dom.clamp(xc - eps * gr - 1.0);
  double hi = dom.clamp(xc + eps * gl + 1.0);

  for (int i = 0; below(hi) || above(lo); ++i) {
    if (i == kMaxExpansion) throw NumericalError("convex", phi.name() + ": resolvent bracket expansion failed");
    const double width = hi - lo + 1.0;
    if (below(hi)) hi = dom.clamp(hi + 2.0 * width);
    if (above(lo)) lo = dom.clamp(lo - 2.0 * width);
  }
  if (!below(lo) && !above(lo)) return lo;
  if (!below(hi) && !above(hi)) return hi;

  for (int i = 0; i < kMaxBisection; ++i) {
    if (hi - lo <= kBisectionTol * std::max({1.0, std::abs(lo), std::abs(hi)})) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    if (above(mid)) {
      hi = mid;
    } else if (below(mid)) {
      lo = mid;
    } else {
      return mid;
    }
  }
  throw NumericalError("convex", phi.name() + ": resolvent bisection did not converge");
}

double resolvent(const ConvexFunction& phi, double eps, double x) {
  if (!(eps > 0.0)) throw ConfigError("convex", "resolvent needs eps > 0");
  if (phi.has_closed_form_prox()) return phi.closed_form_prox()(eps, x);
  return resolvent_bisection(phi, eps, x);
}

double yosida_grad(const ConvexFunction& phi, double eps, double x) {
  return x - resolvent(phi, eps, x);
}

double yosida_value(const ConvexFunction& phi, double eps, double x) {
  const double j = resolvent(phi, eps, x);
  const double d = x - j;
  return 0.5 * d * d + eps * phi(j);
}

}  // namespace levybdsde
