#include "levybdsde/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "levybdsde/cli/catalog.hpp"
#include "levybdsde/errors.hpp"

namespace levybdsde::cli {

namespace {

// 1-based line of the first occurrence of "key" in the source, 0 if absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n')) + 1;
}

[[noreturn]] void fail(const std::string& text, const std::string& path, const std::string& key,
                       const std::string& what) {
  const std::size_t line = key.empty() ? 0 : line_of_key(text, key);
  std::string msg = line ? "line " + std::to_string(line) + ": " : "";
  throw ConfigError("cli", msg + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads one JSON object, writing every value it hands out (defaults
// included) into `out`, and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json* node, json& out, std::string path, const std::string& text)
      : node_(node), out_(out), path_(std::move(path)), text_(text) {
    if (node_ && !node_->is_object()) fail(text_, path_, last_key(), "expected an object");
    if (!out_.is_object()) out_ = json::object();
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  double number(const std::string& key, std::optional<double> fallback) {
    const json* v = take(key);
    double value;
    if (!v) {
      if (!fallback) fail(text_, join(path_, key), "", "missing required field");
      value = *fallback;
    } else {
      if (!v->is_number()) fail(text_, join(path_, key), key, "expected a number");
      value = v->get<double>();
    }
    out_[key] = value;
    return value;
  }

  long long integer(const std::string& key, std::optional<long long> fallback, long long min_value) {
    const json* v = take(key);
    long long value;
    if (!v) {
      if (!fallback) fail(text_, join(path_, key), "", "missing required field");
      value = *fallback;
    } else {
      if (!v->is_number_integer()) fail(text_, join(path_, key), key, "expected an integer");
      value = v->is_number_unsigned() && v->get<unsigned long long>() > static_cast<unsigned long long>(std::numeric_limits<long long>::max())
                  ? std::numeric_limits<long long>::max()
                  : v->get<long long>();
    }
    if (value < min_value) fail(text_, join(path_, key), key, "must be >= " + std::to_string(min_value));
    out_[key] = value;
    return value;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const json* v = take(key);
    std::uint64_t value = fallback;
    if (v) {
      if (!v->is_number_unsigned()) fail(text_, join(path_, key), key, "expected a non-negative integer");
      value = v->get<std::uint64_t>();
    }
    out_[key] = value;
    return value;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    bool value = fallback;
    if (v) {
      if (!v->is_boolean()) fail(text_, join(path_, key), key, "expected true or false");
      value = v->get<bool>();
    }
    out_[key] = value;
    return value;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const json* v = take(key);
    std::string value = fallback;
    if (v) {
      if (!v->is_string()) fail(text_, join(path_, key), key, "expected a string");
      value = v->get<std::string>();
    }
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(text_, join(path_, key), key, "unknown value '" + value + "' (expected one of: " + list + ")");
    }
    out_[key] = value;
    return value;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = take(key);
    std::string value = fallback;
    if (v) {
      if (!v->is_string()) fail(text_, join(path_, key), key, "expected a string");
      value = v->get<std::string>();
    }
    out_[key] = value;
    return value;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
    const json* v = take(key);
    std::vector<double> value;
    if (!v) {
      if (!fallback) fail(text_, join(path_, key), "", "missing required field");
      value = *fallback;
    } else {
      if (!v->is_array()) fail(text_, join(path_, key), key, "expected an array of numbers");
      for (const auto& e : *v) {
        if (!e.is_number()) fail(text_, join(path_, key), key, "expected an array of numbers");
        value.push_back(e.get<double>());
      }
    }
    out_[key] = value;
    return value;
  }

  std::vector<Atom> atoms(const std::string& key) {
    const json* v = take(key);
    std::vector<Atom> value;
    json resolved = json::array();
    if (v) {
      if (!v->is_array()) fail(text_, join(path_, key), key, "expected an array of {size, intensity}");
      for (std::size_t i = 0; i < v->size(); ++i) {
        json entry;
        Reader r(&(*v)[i], entry, join(path_, key) + "[" + std::to_string(i) + "]", text_);
        const double size = r.number("size", std::nullopt);
        const double intensity = r.number("intensity", std::nullopt);
        r.finish();
        value.push_back({size, intensity});
        resolved.push_back(entry);
      }
    }
    out_[key] = resolved;
    return value;
  }

  FunctionSpec function(const std::string& key, FunctionKind kind, std::optional<FunctionSpec> fallback) {
    const json* v = take(key);
    const std::string where = join(path_, key);
    FunctionSpec spec;
    json given = json::object();
    if (!v) {
      if (!fallback) fail(text_, where, "", "missing required field");
      spec.type = fallback->type;
      for (const auto& [k, val] : fallback->params) given[k] = val;
    } else if (v->is_string()) {
      spec.type = v->get<std::string>();
    } else if (v->is_object()) {
      if (!v->contains("type") || !(*v)["type"].is_string()) fail(text_, where + ".type", key, "missing required field");
      spec.type = (*v)["type"].get<std::string>();
      for (const auto& [k, val] : v->items())
        if (k != "type") given[k] = val;
    } else {
      fail(text_, where, key, "expected a function name or {\"type\": ...} object");
    }

    const auto& entries = catalog(kind);
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.type == spec.type; });
    if (it == entries.end()) {
      std::string list;
      for (const auto& e : entries) list += (list.empty() ? "" : ", ") + e.type;
      fail(text_, where + ".type", key, "unknown " + kind_name(kind) + " '" + spec.type + "' (expected one of: " + list + ")");
    }
    json resolved{{"type", spec.type}};
    Reader params(&given, resolved, where, text_);
    for (const auto& [name, def] : it->params) spec.params[name] = params.number(name, def);
    params.finish();
    out_[key] = resolved;
    return spec;
  }

  Reader section(const std::string& key) {
    const json* v = take(key);
    if (v && !v->is_object()) fail(text_, join(path_, key), key, "expected an object");
    return Reader(v, out_[key], join(path_, key), text_);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, val] : node_->items())
      if (!used_.count(k)) fail(text_, join(path_, k), k, "unknown key");
  }

 private:
  const json* take(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &(*node_)[key];
  }

  std::string last_key() const {
    const auto dot = path_.rfind('.');
    return dot == std::string::npos ? path_ : path_.substr(dot + 1);
  }

  const json* node_;
  json& out_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> used_;
};

void read_model(Reader& r, ModelSettings& m) {
  m.drift = r.number("drift", 0.0);
  m.kappa = r.number("kappa", 0.0);
  m.atoms = r.atoms("atoms");
  m.exp_moment_lambda = r.number("exp_moment_lambda", 1.0);
  r.finish();
}

void read_solver(Reader& r, ExperimentConfig& c, bool eps_required, bool ladder) {
  auto& s = c.solver;
  s.n_steps = static_cast<std::size_t>(r.integer("n_steps", 100, 1));
  if (eps_required) {
    s.eps = r.number("eps", std::nullopt);
  } else if (r.has("eps")) {
    s.eps = r.number("eps", std::nullopt);
  }
  if (ladder) c.eps_ladder = r.numbers("eps_ladder", std::nullopt);
  s.n_inner = static_cast<std::size_t>(r.integer("n_inner", 1000, 1));
  s.n_outer = static_cast<std::size_t>(r.integer("n_outer", 1, 1));
  s.ce_method = r.choice("ce_method", "regression", {"regression", "tree"}) == "tree" ? CeMethod::tree : CeMethod::regression;
  s.degree = static_cast<int>(r.integer("degree", 3, 0));
  s.step_mode = r.choice("step_mode", "implicit", {"implicit", "explicit"}) == "explicit" ? StepMode::explicit_step
                                                                                        : StepMode::implicit_prox;
  if (r.has("brownian_seed")) s.brownian_seed = r.seed("brownian_seed", 0);
  s.tree_max_jumps = static_cast<int>(r.integer("tree_max_jumps", 3, 0));
  s.tree_gauss_nodes = static_cast<int>(r.integer("tree_gauss_nodes", 3, 1));
  s.max_tree_nodes = static_cast<std::size_t>(r.integer("max_tree_nodes", 4'000'000, 1));
  s.picard_refinement = r.boolean("picard_refinement", false);
  r.finish();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const Overrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n') + 1;
    std::string what = e.what();
    const auto colon = what.find("parse error");
    throw ConfigError("cli", "line " + std::to_string(line) + ": invalid JSON (" +
                                 (colon == std::string::npos ? what : what.substr(colon)) + ")");
  }
  if (!doc.is_object()) throw ConfigError("cli", "line 1: config must be a JSON object");

  ExperimentConfig c;
  c.resolved = json::object();
  Reader root(&doc, c.resolved, "", text);

  if (overrides.command) {
    if (doc.contains("command") && doc["command"] != json(*overrides.command))
      throw ConfigError("cli", "command '" + *overrides.command + "' given on the command line does not match " +
                                   "the config's command " + doc["command"].dump());
    doc["command"] = *overrides.command;
  }
  if (!doc.contains("command")) throw ConfigError("cli", "command: missing required field");
  c.command = root.choice("command", "", command_names());
  c.seed = root.seed("seed", 1);
  if (overrides.seed) c.seed = *overrides.seed;
  c.resolved["seed"] = c.seed;
  const long long workers = root.integer("workers", 1, 1);
  c.workers = overrides.workers ? *overrides.workers : static_cast<unsigned>(workers);
  c.resolved["workers"] = c.workers;
  c.solver.seed = c.seed;
  c.solver.workers = c.workers;

  const std::string& cmd = c.command;
  const bool needs_model = cmd != "prox-check";
  if (needs_model) {
    auto r = root.section("model");
    read_model(r, c.model);
  }
  if (cmd == "teugels" || cmd == "solve" || cmd == "converge" || cmd == "mspdie") {
    auto r = root.section("basis");
    c.basis.order = static_cast<int>(r.integer("order", 2, 1));
    c.basis.pivot_tol = r.number("pivot_tol", 1e-12);
    r.finish();
  }
  if (cmd == "simulate") {
    auto r = root.section("simulate");
    c.simulate.n_paths = static_cast<std::size_t>(r.integer("n_paths", 1000, 1));
    c.simulate.n_steps = static_cast<std::size_t>(r.integer("n_steps", 100, 1));
    c.simulate.horizon = r.number("horizon", 1.0);
    r.finish();
  }
  if (cmd == "prox-check") {
    auto r = root.section("prox_check");
    c.prox_check.phi = r.function("phi", FunctionKind::phi, std::nullopt);
    c.prox_check.eps = r.numbers("eps", std::vector<double>{0.1});
    c.prox_check.samples = static_cast<std::size_t>(r.integer("samples", 10000, 1));
    c.prox_check.x_min = r.number("x_min", -3.0);
    c.prox_check.x_max = r.number("x_max", 3.0);
    c.prox_check.x_points = static_cast<std::size_t>(r.integer("x_points", 61, 2));
    r.finish();
    for (double e : c.prox_check.eps)
      if (!(e > 0.0)) throw ConfigError("cli", "prox_check.eps: entries must be > 0");
  }
  if (cmd == "solve" || cmd == "converge") {
    auto r = root.section("problem");
    auto& p = c.problem;
    p.t0 = r.number("t0", 0.0);
    p.horizon = r.number("horizon", 1.0);
    p.x0 = r.number("x0", 0.0);
    p.sigma = r.function("sigma", FunctionKind::sigma, p.sigma);
    p.terminal = r.function("terminal", FunctionKind::terminal, std::nullopt);
    p.f = r.function("f", FunctionKind::driver, p.f);
    p.g = r.function("g", FunctionKind::noise, p.g);
    p.phi = r.function("phi", FunctionKind::phi, p.phi);
    p.lipschitz_f = r.number("lipschitz_f", 0.0);
    p.lipschitz_g = r.number("lipschitz_g", 0.0);
    p.alpha_g = r.number("alpha_g", 0.0);
    r.finish();
  }
  if (cmd == "mspdie") {
    auto r = root.section("problem");
    auto& p = c.problem;
    p.horizon = r.number("horizon", 1.0);
    p.t = r.number("t", 0.0);
    p.x = r.number("x", std::nullopt);
    p.sigma = r.function("sigma", FunctionKind::sigma, p.sigma);
    p.terminal = r.function("u0", FunctionKind::terminal, std::nullopt);
    p.f = r.function("f", FunctionKind::driver, p.f);
    p.g = r.function("g", FunctionKind::noise, p.g);
    p.phi = r.function("phi", FunctionKind::phi, p.phi);
    p.x_sweep = r.numbers("x_sweep", std::vector<double>{});
    r.finish();
  }
  if (cmd == "flow-check") {
    auto r = root.section("problem");
    c.problem.horizon = r.number("horizon", 1.0);
    c.problem.sigma = r.function("sigma", FunctionKind::sigma, c.problem.sigma);
    r.finish();
    auto fc = root.section("flow_check");
    auto& f = c.flow_check;
    f.t = fc.number("t", 0.0);
    f.x = fc.number("x", 0.0);
    f.dx = fc.numbers("dx", std::vector<double>{0.4, 0.2, 0.1, 0.05, 0.025});
    f.dt = fc.numbers("dt", std::vector<double>{});
    f.n_paths = static_cast<std::size_t>(fc.integer("n_paths", 10000, 1));
    f.n_steps = static_cast<std::size_t>(fc.integer("n_steps", 64, 1));
    fc.finish();
  }
  if (cmd == "solve" || cmd == "converge" || cmd == "mspdie") {
    auto r = root.section("solver");
    read_solver(r, c, cmd != "converge", cmd == "converge");
    c.solver.seed = c.seed;
    c.solver.workers = c.workers;
  }
  {
    auto r = root.section("output");
    c.output.dir = r.text("dir", "out");
    c.output.max_paths = static_cast<std::size_t>(r.integer("max_paths", 10, 0));
    r.finish();
    if (overrides.out_dir) c.output.dir = *overrides.out_dir;
    // The output location is not part of the experiment; keep it out of the hash.
    c.resolved.erase("output");
    c.resolved["output"] = json{{"max_paths", c.output.max_paths}};
  }
  root.finish();

  try {
    if (needs_model) (void)c.model.build();
  } catch (const ConfigError& e) {
    throw ConfigError("cli", std::string("model: ") + e.what());
  }
  if (cmd == "solve" || cmd == "mspdie") {
    try {
      c.solver.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("cli", std::string("solver: ") + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace levybdsde::cli
