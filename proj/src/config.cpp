#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "stablecone/cone.hpp"
#include "stablecone/experiments.hpp"
#include "stablecone/walk.hpp"

namespace stablecone {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 9> kKinds{{
    {ExperimentKind::survival, "survival"},
    {ExperimentKind::beta, "beta"},
    {ExperimentKind::martin_profile, "martin-profile"},
    {ExperimentKind::v_estimate, "v-estimate"},
    {ExperimentKind::kappa, "kappa"},
    {ExperimentKind::compensator, "compensator"},
    {ExperimentKind::meander_invariance, "meander-invariance"},
    {ExperimentKind::tightness, "tightness"},
    {ExperimentKind::kernel_verify, "kernel-verify"},
}};

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Typed access to one JSON object; rejects keys outside the known set.
class Block {
 public:
  Block(const json* j, std::string path, std::vector<std::string_view> keys)
      : j_(j), path_(std::move(path)) {
    if (!j_) return;
    if (!j_->is_object()) throw ConfigError(path_, "expected an object");
    for (const auto& item : j_->items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) != keys.end()) continue;
      std::string_view best;
      std::size_t best_d = std::numeric_limits<std::size_t>::max();
      for (auto k : keys) {
        const auto dist = edit_distance(item.key(), k);
        if (dist < best_d) {
          best_d = dist;
          best = k;
        }
      }
      throw ConfigError(join(path_, item.key()),
                        "unknown key; nearest known key is \"" + std::string(best) + "\"");
    }
  }

  const json* find(std::string_view key) const {
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }
  bool present(std::string_view key) const { return find(key) != nullptr; }
  std::string path(std::string_view key) const { return join(path_, key); }

  double number(std::string_view key, double def) const {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key), "must be finite");
    return x;
  }

  std::optional<double> optional_number(std::string_view key, std::optional<double> def) const {
    const json* v = find(key);
    if (!v) return def;
    if (v->is_null()) return std::nullopt;
    return number(key, 0.0);
  }

  static std::int64_t as_integer(const json& v, const std::string& where) {
    if (v.is_number_integer()) {
      if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(INT64_MAX)) {
        throw ConfigError(where, "integer out of range");
      }
      return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) {
        return static_cast<std::int64_t>(x);
      }
    }
    throw ConfigError(where, "expected an integer");
  }

  std::int64_t integer(std::string_view key, std::int64_t def) const {
    const json* v = find(key);
    return v ? as_integer(*v, path(key)) : def;
  }

  bool boolean(std::string_view key, bool def) const {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(std::string_view key, std::string def) const {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(std::string_view key, std::vector<double> def) const {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      const std::string where = path(key) + "[" + std::to_string(i) + "]";
      if (!e.is_number()) throw ConfigError(where, "expected a number");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) throw ConfigError(where, "must be finite");
    }
    return out;
  }

  std::vector<std::int64_t> integers(std::string_view key, std::vector<std::int64_t> def) const {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(path(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_integer((*v)[i], path(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  const json* j_;
  std::string path_;
};

const json* child(const json& root, std::string_view key) {
  auto it = root.find(key);
  return it == root.end() || it->is_null() ? nullptr : &*it;
}

Vec axis_point(int dim, double height) {
  Vec v(static_cast<std::size_t>(dim), 0.0);
  v.back() = height;
  return v;
}

std::vector<std::int64_t> powers(std::int64_t base, int lo, int hi) {
  std::vector<std::int64_t> out;
  std::int64_t v = 1;
  for (int i = 0; i <= hi; ++i) {
    if (i >= lo) out.push_back(v);
    v *= base;
  }
  return out;
}

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ConfigError(path, msg);
}

void check_alpha(double alpha, const std::string& path) {
  require(alpha > 0.0 && alpha < 2.0, path, "alpha must lie in (0,2) with alpha != 1");
  require(alpha != 1.0, path, "alpha = 1 is excluded: alpha must lie in (0,2) with alpha != 1");
}

void check_grid(std::span<const std::int64_t> g, std::int64_t min, const std::string& path) {
  require(!g.empty(), path, "must not be empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    require(g[i] >= min, path, "entries must be >= " + std::to_string(min));
    if (i > 0) require(g[i] > g[i - 1], path, "entries must be strictly increasing");
  }
}

void check_point(const ExperimentConfig& c, const Vec& x, const std::string& path) {
  require(static_cast<int>(x.size()) == c.stable.dim, path,
          "needs " + std::to_string(c.stable.dim) + " coordinates (stable.dim)");
  require(contains(ConeSpec(c.stable.dim, c.cone.theta), x), path, "point is not inside the cone");
}

bool uses_cone(ExperimentKind k) { return k != ExperimentKind::kernel_verify; }
bool is_meander(ExperimentKind k) {
  return k == ExperimentKind::meander_invariance || k == ExperimentKind::tightness;
}
bool half_space(const ExperimentConfig& c) {
  return std::abs(c.cone.theta - 0.5 * std::numbers::pi) < 1e-12;
}

json vec_json(const Vec& v) { return json(v); }

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& [k, n] : kKinds) {
    if (k == kind) return n;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::vector<std::string> kind_names() {
  std::vector<std::string> out;
  for (const auto& [k, n] : kKinds) out.emplace_back(n);
  return out;
}

void validate_config(const ExperimentConfig& c) {
  check_alpha(c.stable.alpha, "stable.alpha");
  require(c.stable.dim >= 1 && c.stable.dim <= kMaxDim, "stable.dim",
          "must be between 1 and " + std::to_string(kMaxDim));
  if (uses_cone(c.experiment)) {
    require(c.stable.dim >= 2, "stable.dim", "cone experiments need dim >= 2");
    require(c.cone.theta > 0.0 && c.cone.theta < std::numbers::pi, "cone.theta",
            "aperture must lie in (0, pi)");
  }
  require(c.law.kind == "exact" || c.law.kind == "perturbed", "law.kind",
          "must be \"exact\" or \"perturbed\"");
  if (c.law.kind == "perturbed") {
    require(c.law.r1 > 0.0, "law.r1", "must be positive");
    require(c.law.r2 > 0.0 && c.law.r2 < c.law.r3, "law.r2", "need 0 < r2 < r3");
    require(c.law.eps > 0.0, "law.eps", "must be positive");
    const double cap = IncrementLaw::max_perturbation(StableParams(c.stable.alpha, c.stable.dim),
                                                      c.law.r2, c.law.r3);
    require(c.law.eps <= cap, "law.eps", "exceeds the largest valid perturbation " + format_double(cap));
  }
  if (uses_cone(c.experiment)) {
    check_point(c, c.walk.start, "walk.start");
    check_point(c, c.martin.x, "martin.x");
    check_point(c, c.harmonic.x, "harmonic.x");
    for (std::size_t i = 0; i < c.kappa.starts.size(); ++i) {
      check_point(c, c.kappa.starts[i], "kappa.starts[" + std::to_string(i) + "]");
    }
  }
  require(c.walk.reps >= 1, "walk.reps", "must be >= 1");
  check_grid(c.walk.horizons, 1, "walk.horizons");
  if (c.experiment == ExperimentKind::beta) {
    require(c.walk.horizons.size() >= 5, "walk.horizons", "beta needs >= 5 horizons");
    require(c.walk.reps >= 100000, "walk.reps", "beta needs reps >= 100000");
  }
  require(c.martin.start_scale > 0.0, "martin.start_scale", "must be positive");
  require(c.martin.angles == 0 || c.martin.angles >= 2, "martin.angles", "must be 0 or >= 2");
  require(c.martin.reps >= 1, "martin.reps", "must be >= 1");
  check_grid(c.martin.horizons, 1, "martin.horizons");
  check_grid(c.v.m_grid, 0, "v.m_grid");
  require(c.harmonic.m_star >= 0, "harmonic.m_star", "must be >= 0");
  require(c.harmonic.inner_reps >= 1, "harmonic.inner_reps", "must be >= 1");
  require(c.harmonic.outer_reps >= 2, "harmonic.outer_reps", "must be >= 2");
  require(c.harmonic.reps >= 1, "harmonic.reps", "must be >= 1");
  require(!c.kappa.starts.empty(), "kappa.starts", "must not be empty");
  if (c.kappa.beta) require(*c.kappa.beta > 0.0, "kappa.beta", "must be positive");
  if (c.experiment == ExperimentKind::compensator) {
    require(half_space(c), "cone.theta", "the compensator needs the half-space (theta = pi/2)");
  }
  require(c.compensator.epsilon > 0.0 && c.compensator.epsilon <= c.stable.alpha,
          "compensator.epsilon", "need 0 < epsilon <= alpha");
  require(c.compensator.R >= 0.0, "compensator.R", "must be >= 0");
  if (c.compensator.c) require(*c.compensator.c >= 0.0, "compensator.c", "must be >= 0");
  require(c.compensator.mc_samples >= 2, "compensator.mc_samples", "must be >= 2");
  require(!c.compensator.ladder.empty(), "compensator.ladder", "must not be empty");
  for (std::size_t i = 0; i < c.compensator.ladder.size(); ++i) {
    require(c.compensator.ladder[i] > 0.0, "compensator.ladder", "entries must be positive");
    if (i > 0) {
      require(c.compensator.ladder[i] > c.compensator.ladder[i - 1], "compensator.ladder",
              "entries must be strictly increasing");
    }
  }
  require(c.compensator.trace_reps >= 0, "compensator.trace_reps", "must be >= 0");
  require(c.compensator.trace_steps >= 1, "compensator.trace_steps", "must be >= 1");
  require(c.meander.n >= 1, "meander.n", "must be >= 1");
  require(c.meander.target >= 100, "meander.target", "must be >= 100");
  require(c.meander.k >= 1 && c.meander.k <= c.meander.n, "meander.k", "need 1 <= k <= n");
  if (c.meander.control_alpha) check_alpha(*c.meander.control_alpha, "meander.control_alpha");
  require(!c.tightness.a_grid.empty(), "tightness.a_grid", "must not be empty");
  for (std::size_t i = 0; i < c.tightness.a_grid.size(); ++i) {
    require(c.tightness.a_grid[i] > 0.0, "tightness.a_grid", "entries must be positive");
    if (i > 0) {
      require(c.tightness.a_grid[i] > c.tightness.a_grid[i - 1], "tightness.a_grid",
              "entries must be strictly increasing");
    }
  }
  require(c.tightness.fit_lo < c.tightness.fit_hi, "tightness.fit_lo", "need fit_lo < fit_hi");
  if (c.tightness.beta) require(*c.tightness.beta > 0.0, "tightness.beta", "must be positive");
  require(!c.kernel.alphas.empty(), "kernel.alphas", "must not be empty");
  for (double a : c.kernel.alphas) check_alpha(a, "kernel.alphas");
  require(!c.kernel.dims.empty(), "kernel.dims", "must not be empty");
  for (int d : c.kernel.dims) require(d >= 1 && d <= kMaxDim, "kernel.dims", "dims must be in 1..8");
  for (double q : c.kernel.q) require(q >= 0.0 && q < 1.0, "kernel.q", "entries must be in [0,1)");
  require(c.kernel.exit_samples >= static_cast<std::int64_t>(kKsMinSize), "kernel.exit_samples",
          "must be >= 50");
  require(c.kernel.identity_samples >= 2, "kernel.identity_samples", "must be >= 2");
  require(c.kernel.green_pairs >= 1, "kernel.green_pairs", "must be >= 1");
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  Block top(&root, "",
            {"experiment", "name", "seed", "stable", "cone", "law", "walk", "martin", "v",
             "harmonic", "kappa", "compensator", "meander", "tightness", "kernel", "assert"});
  ExperimentConfig c;
  const json* kind = top.find("experiment");
  if (!kind) throw ConfigError("experiment", "required; one of the experiment kinds");
  if (!kind->is_string() || !parse_kind(kind->get<std::string>())) {
    std::string all;
    for (const auto& n : kind_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("experiment", "must be one of: " + all);
  }
  c.experiment = *parse_kind(kind->get<std::string>());
  c.name = top.string("name", std::string(kind_name(c.experiment)));
  if (const json* s = top.find("seed")) {
    if (!s->is_number_integer() || (!s->is_number_unsigned() && s->get<std::int64_t>() < 0)) {
      throw ConfigError("seed", "expected a non-negative 64-bit integer");
    }
    c.seed = s->get<std::uint64_t>();
  }
  c.assert_checks = top.boolean("assert", false);

  Block stable(child(root, "stable"), "stable", {"alpha", "dim"});
  c.stable.alpha = stable.number("alpha", c.stable.alpha);
  c.stable.dim = static_cast<int>(stable.integer("dim", c.stable.dim));
  check_alpha(c.stable.alpha, "stable.alpha");
  require(c.stable.dim >= 1 && c.stable.dim <= kMaxDim, "stable.dim",
          "must be between 1 and " + std::to_string(kMaxDim));
  const int d = c.stable.dim;

  Block cone(child(root, "cone"), "cone", {"theta"});
  c.cone.theta = cone.number("theta", c.cone.theta);

  Block law(child(root, "law"), "law", {"kind", "eps", "r1", "r2", "r3"});
  c.law.kind = law.string("kind", c.law.kind);
  c.law.r1 = law.number("r1", c.law.r1);
  c.law.r2 = law.number("r2", c.law.r2);
  c.law.r3 = law.number("r3", c.law.r3);
  c.law.eps = law.number("eps", 0.0);
  if (c.law.kind == "perturbed" && !law.present("eps") && c.law.r2 > 0.0 && c.law.r2 < c.law.r3) {
    c.law.eps = IncrementLaw::max_perturbation(StableParams(c.stable.alpha, d), c.law.r2, c.law.r3);
  }

  Block walk(child(root, "walk"), "walk", {"start", "reps", "horizons"});
  c.walk.start = walk.numbers("start", axis_point(d, 1.0));
  c.walk.reps = walk.integer("reps", is_meander(c.experiment) ? 1000000 : 100000);
  c.walk.horizons = walk.integers("horizons", powers(2, 4, 14));

  Block martin(child(root, "martin"), "martin", {"start_scale", "angles", "x", "reps", "horizons"});
  c.martin.start_scale = martin.number("start_scale", c.martin.start_scale);
  c.martin.angles = static_cast<int>(martin.integer("angles", c.martin.angles));
  c.martin.x = martin.numbers("x", axis_point(d, 2.0));
  c.martin.reps = martin.integer("reps", c.martin.reps);
  c.martin.horizons = martin.integers("horizons", powers(2, 4, 12));

  Block v(child(root, "v"), "v", {"m_grid"});
  std::vector<std::int64_t> m_default{0};
  for (auto p : powers(4, 0, 7)) m_default.push_back(p);
  c.v.m_grid = v.integers("m_grid", m_default);

  Block harm(child(root, "harmonic"), "harmonic",
             {"enabled", "x", "m_star", "inner_reps", "outer_reps", "reps"});
  c.harmonic.enabled = harm.boolean("enabled", c.harmonic.enabled);
  c.harmonic.x = harm.numbers("x", axis_point(d, 2.0));
  c.harmonic.m_star = harm.integer("m_star", c.harmonic.m_star);
  c.harmonic.inner_reps = harm.integer("inner_reps", c.harmonic.inner_reps);
  c.harmonic.outer_reps = harm.integer("outer_reps", c.harmonic.outer_reps);
  c.harmonic.reps = harm.integer("reps", c.harmonic.reps);

  Block kap(child(root, "kappa"), "kappa", {"starts", "beta"});
  if (const json* s = kap.find("starts")) {
    if (!s->is_array()) throw ConfigError("kappa.starts", "expected an array of points");
    for (std::size_t i = 0; i < s->size(); ++i) {
      const std::string where = "kappa.starts[" + std::to_string(i) + "]";
      const auto& p = (*s)[i];
      if (!p.is_array()) throw ConfigError(where, "expected an array of numbers");
      Vec pt;
      for (const auto& e : p) {
        if (!e.is_number()) throw ConfigError(where, "expected an array of numbers");
        pt.push_back(e.get<double>());
      }
      c.kappa.starts.push_back(std::move(pt));
    }
  } else {
    c.kappa.starts = {axis_point(d, 1.0), axis_point(d, 2.0)};
  }
  c.kappa.beta = kap.optional_number("beta", std::nullopt);

  Block comp(child(root, "compensator"), "compensator",
             {"epsilon", "R", "c", "mc_samples", "ladder", "trace_reps", "trace_steps"});
  c.compensator.epsilon = comp.number("epsilon", c.stable.alpha > 1.0 ? 0.5 : 0.3);
  c.compensator.R = comp.number("R", c.compensator.R);
  c.compensator.c = comp.optional_number("c", std::nullopt);
  c.compensator.mc_samples = comp.integer("mc_samples", c.compensator.mc_samples);
  c.compensator.ladder = comp.numbers("ladder", c.compensator.ladder);
  c.compensator.trace_reps = comp.integer("trace_reps", c.compensator.trace_reps);
  c.compensator.trace_steps = comp.integer("trace_steps", c.compensator.trace_steps);

  Block mea(child(root, "meander"), "meander", {"n", "target", "k", "control_alpha"});
  c.meander.n = mea.integer("n", c.meander.n);
  c.meander.target = mea.integer("target", c.meander.target);
  c.meander.k = static_cast<int>(mea.integer("k", c.meander.k));
  c.meander.control_alpha = mea.optional_number("control_alpha", c.meander.control_alpha);

  Block tig(child(root, "tightness"), "tightness", {"a_grid", "fit_lo", "fit_hi", "beta"});
  std::vector<double> a_default;
  for (int i = -2; i <= 10; ++i) a_default.push_back(std::pow(2.0, 0.5 * i));
  c.tightness.a_grid = tig.numbers("a_grid", a_default);
  c.tightness.fit_lo = tig.number("fit_lo", c.tightness.fit_lo);
  c.tightness.fit_hi = tig.number("fit_hi", c.tightness.fit_hi);
  const bool hs = std::abs(c.cone.theta - 0.5 * std::numbers::pi) < 1e-12;
  c.tightness.beta = tig.optional_number(
      "beta", hs ? std::optional<double>(0.5 * c.stable.alpha) : std::nullopt);

  Block ker(child(root, "kernel"), "kernel",
            {"alphas", "dims", "q", "exit_samples", "identity_samples", "green_pairs"});
  c.kernel.alphas = ker.numbers("alphas", c.kernel.alphas);
  std::vector<std::int64_t> dims_default(c.kernel.dims.begin(), c.kernel.dims.end());
  c.kernel.dims.clear();
  for (auto dd : ker.integers("dims", dims_default)) c.kernel.dims.push_back(static_cast<int>(dd));
  c.kernel.q = ker.numbers("q", c.kernel.q);
  c.kernel.exit_samples = ker.integer("exit_samples", c.kernel.exit_samples);
  c.kernel.identity_samples = ker.integer("identity_samples", c.kernel.identity_samples);
  c.kernel.green_pairs = ker.integer("green_pairs", c.kernel.green_pairs);

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["experiment"] = std::string(kind_name(c.experiment));
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["stable"] = {{"alpha", c.stable.alpha}, {"dim", c.stable.dim}};
  j["cone"] = {{"theta", c.cone.theta}};
  j["law"] = {{"kind", c.law.kind}, {"eps", c.law.eps}, {"r1", c.law.r1}, {"r2", c.law.r2},
              {"r3", c.law.r3}};
  j["walk"] = {{"start", vec_json(c.walk.start)}, {"reps", c.walk.reps},
               {"horizons", c.walk.horizons}};
  j["martin"] = {{"start_scale", c.martin.start_scale}, {"angles", c.martin.angles},
                 {"x", vec_json(c.martin.x)},           {"reps", c.martin.reps},
                 {"horizons", c.martin.horizons}};
  j["v"] = {{"m_grid", c.v.m_grid}};
  j["harmonic"] = {{"enabled", c.harmonic.enabled},       {"x", vec_json(c.harmonic.x)},
                   {"m_star", c.harmonic.m_star},         {"inner_reps", c.harmonic.inner_reps},
                   {"outer_reps", c.harmonic.outer_reps}, {"reps", c.harmonic.reps}};
  j["kappa"] = {{"starts", c.kappa.starts}, {"beta", opt(c.kappa.beta)}};
  j["compensator"] = {{"epsilon", c.compensator.epsilon},
                      {"R", c.compensator.R},
                      {"c", opt(c.compensator.c)},
                      {"mc_samples", c.compensator.mc_samples},
                      {"ladder", c.compensator.ladder},
                      {"trace_reps", c.compensator.trace_reps},
                      {"trace_steps", c.compensator.trace_steps}};
  j["meander"] = {{"n", c.meander.n},
                  {"target", c.meander.target},
                  {"k", c.meander.k},
                  {"control_alpha", opt(c.meander.control_alpha)}};
  j["tightness"] = {{"a_grid", c.tightness.a_grid},
                    {"fit_lo", c.tightness.fit_lo},
                    {"fit_hi", c.tightness.fit_hi},
                    {"beta", opt(c.tightness.beta)}};
  j["kernel"] = {{"alphas", c.kernel.alphas},
                 {"dims", c.kernel.dims},
                 {"q", c.kernel.q},
                 {"exit_samples", c.kernel.exit_samples},
                 {"identity_samples", c.kernel.identity_samples},
                 {"green_pairs", c.kernel.green_pairs}};
  j["assert"] = c.assert_checks;
  return j.dump(2) + "\n";
}

IncrementLaw make_law(const ExperimentConfig& c) {
  const StableParams p(c.stable.alpha, c.stable.dim);
  if (c.law.kind == "perturbed") {
    return IncrementLaw::perturbed(p, c.law.eps, c.law.r1, c.law.r2, c.law.r3);
  }
  return IncrementLaw::exact(p);
}

}  // namespace stablecone
