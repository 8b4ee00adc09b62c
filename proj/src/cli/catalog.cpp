#include "levybdsde/cli/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "levybdsde/errors.hpp"

namespace levybdsde::cli {

const std::vector<CatalogEntry>& catalog(FunctionKind kind) {
  static const std::vector<CatalogEntry> sigma{
      {"constant", {{"value", 1.0}}, "sigma(x) = value"},
      {"sine", {{"a", 1.0}, {"b", std::nullopt}}, "sigma(x) = a + b sin x"},
      {"linear", {{"a", 0.0}, {"b", 1.0}}, "sigma(x) = a + b x"},
  };
  static const std::vector<CatalogEntry> driver{
      {"zero", {}, "f = 0"},
      {"constant", {{"value", std::nullopt}}, "f = value"},
      {"linear", {{"rho", std::nullopt}}, "f = rho y"},
      {"affine", {{"a", 0.0}, {"rho", 0.0}, {"z", 0.0}}, "f = a + rho y + z sum_i z_i"},
  };
  static const std::vector<CatalogEntry> noise{
      {"zero", {}, "g = 0"},
      {"constant", {{"beta", std::nullopt}}, "g = beta"},
      {"linear", {{"beta", std::nullopt}}, "g = beta y"},
  };
  static const std::vector<CatalogEntry> terminal{
      {"constant", {{"value", std::nullopt}}, "c"},
      {"identity", {}, "x"},
      {"linear", {{"a", 0.0}, {"b", 1.0}}, "a + b x"},
      {"square", {}, "x^2"},
      {"clamp", {{"lo", std::nullopt}, {"hi", std::nullopt}}, "min(max(x, lo), hi)"},
      {"sine", {}, "sin x"},
      {"cosine", {}, "cos x"},
  };
  static const std::vector<CatalogEntry> phi{
      {"zero", {}, "0"},
      {"quadratic", {}, "y^2 / 2"},
      {"abs", {}, "|y|"},
      {"half_line_upper", {{"c", 0.0}}, "indicator of (-inf, c]"},
      {"half_line_lower", {{"c", 0.0}}, "indicator of [c, inf)"},
      {"interval", {{"lo", std::nullopt}, {"hi", std::nullopt}}, "indicator of [lo, hi]"},
  };
  switch (kind) {
    case FunctionKind::sigma: return sigma;
    case FunctionKind::driver: return driver;
    case FunctionKind::noise: return noise;
    case FunctionKind::terminal: return terminal;
    case FunctionKind::phi: return phi;
  }
  return phi;
}

std::string kind_name(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::sigma: return "sigma";
    case FunctionKind::driver: return "driver f";
    case FunctionKind::noise: return "noise coefficient g";
    case FunctionKind::terminal: return "terminal function";
    case FunctionKind::phi: return "convex function";
  }
  return "function";
}

ScalarFn make_sigma(const FunctionSpec& s) {
  if (s.type == "constant") {
    const double v = s.param("value");
    return [v](double) { return v; };
  }
  if (s.type == "sine") {
    const double a = s.param("a"), b = s.param("b");
    return [a, b](double x) { return a + b * std::sin(x); };
  }
  if (s.type == "linear") {
    const double a = s.param("a"), b = s.param("b");
    return [a, b](double x) { return a + b * x; };
  }
  throw ConfigError("cli", "unknown sigma '" + s.type + "'");
}

DriverFn make_driver(const FunctionSpec& s) {
  if (s.type == "zero") return {};
  if (s.type == "constant") {
    const double v = s.param("value");
    return [v](double, double, double, std::span<const double>) { return v; };
  }
  if (s.type == "linear") {
    const double rho = s.param("rho");
    return [rho](double, double, double y, std::span<const double>) { return rho * y; };
  }
  if (s.type == "affine") {
    const double a = s.param("a"), rho = s.param("rho"), zc = s.param("z");
    return [a, rho, zc](double, double, double y, std::span<const double> z) {
      double sum = 0.0;
      for (double v : z) sum += v;
      return a + rho * y + zc * sum;
    };
  }
  throw ConfigError("cli", "unknown driver '" + s.type + "'");
}

NoiseFn make_noise(const FunctionSpec& s) {
  if (s.type == "zero") return {};
  if (s.type == "constant") {
    const double beta = s.param("beta");
    return [beta](double, double, double) { return beta; };
  }
  if (s.type == "linear") {
    const double beta = s.param("beta");
    return [beta](double, double, double y) { return beta * y; };
  }
  throw ConfigError("cli", "unknown noise coefficient '" + s.type + "'");
}

ScalarFn make_terminal(const FunctionSpec& s) {
  if (s.type == "constant") {
    const double v = s.param("value");
    return [v](double) { return v; };
  }
  if (s.type == "identity") return [](double x) { return x; };
  if (s.type == "linear") {
    const double a = s.param("a"), b = s.param("b");
    return [a, b](double x) { return a + b * x; };
  }
  if (s.type == "square") return [](double x) { return x * x; };
  if (s.type == "clamp") {
    const double lo = s.param("lo"), hi = s.param("hi");
    if (!(lo <= hi)) throw ConfigError("cli", "clamp needs lo <= hi");
    return [lo, hi](double x) { return std::clamp(x, lo, hi); };
  }
  if (s.type == "sine") return [](double x) { return std::sin(x); };
  if (s.type == "cosine") return [](double x) { return std::cos(x); };
  throw ConfigError("cli", "unknown terminal function '" + s.type + "'");
}

ConvexFunction make_phi(const FunctionSpec& s) {
  if (s.type == "zero") return ConvexFunction::zero();
  if (s.type == "quadratic") return ConvexFunction::quadratic();
  if (s.type == "abs") return ConvexFunction::abs();
  if (s.type == "half_line_upper") return ConvexFunction::half_line_upper(s.param("c"));
  if (s.type == "half_line_lower") return ConvexFunction::half_line_lower(s.param("c"));
  if (s.type == "interval") return ConvexFunction::interval(s.param("lo"), s.param("hi"));
  throw ConfigError("cli", "unknown convex function '" + s.type + "'");
}

}  // namespace levybdsde::cli
