#include "stablecone/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "stablecone/compensator.hpp"
#include "stablecone/cone.hpp"
#include "stablecone/martin.hpp"
#include "stablecone/meander.hpp"
#include "stablecone/parallel.hpp"
#include "stablecone/stats.hpp"
#include "stablecone/walk.hpp"

namespace stablecone {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(const std::string& v) { return v; }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  template <class... T>
  void row(const T&... v) {
    std::vector<std::string> cells{cell(v)...};
    line(cells);
  }
  void row(const std::vector<std::string>& cells) { line(cells); }
  const std::string& str() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }
  std::size_t width_;
  std::string text_;
};

std::vector<std::string> coord_header(const std::string& prefix, int d) {
  std::vector<std::string> h;
  for (int c = 1; c <= d; ++c) h.push_back(prefix + std::to_string(c));
  return h;
}

std::vector<std::string> coord_cells(std::span<const double> x) {
  std::vector<std::string> out;
  for (double v : x) out.push_back(format_double(v));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Run {
  Run(const ExperimentConfig& c, fs::path d, int t) : cfg(c), dir(std::move(d)), threads(t) {}

  const ExperimentConfig& cfg;
  fs::path dir;
  int threads;
  json results = json::object();
  std::vector<CheckResult> checks;
  std::vector<std::string> flags;
  std::vector<OutputFile> outputs;

  void write(const std::string& name, const std::string& content) {
    for (const auto& o : outputs) {
      if (o.path == name) throw std::logic_error("output written twice: " + name);
    }
    write_file(dir / name, content);
    outputs.push_back({name, sha256_hex(content), content.size()});
  }
  void check(const std::string& name, bool passed, const std::string& detail) {
    checks.push_back({name, passed, detail});
  }
  void flag(const std::string& f) { flags.push_back(f); }

  ConeSpec cone() const { return ConeSpec(cfg.stable.dim, cfg.cone.theta); }
  StableParams params() const { return StableParams(cfg.stable.alpha, cfg.stable.dim); }
  bool half_space() const { return std::abs(cfg.cone.theta - 0.5 * std::numbers::pi) < 1e-12; }
  std::uint64_t seed(std::string_view tag, std::uint64_t i = 0) const {
    return substream_key(cfg.seed, tag, i);
  }
};

std::string survival_csv(const SurvivalTable& t) {
  Csv csv({"n", "survivors", "reps", "p_hat", "ci_lo", "ci_hi", "degenerate"});
  for (std::size_t i = 0; i < t.horizons.size(); ++i) {
    csv.row(t.horizons[i], t.survivors[i], t.reps, t.estimate[i], t.ci_lo[i], t.ci_hi[i],
            static_cast<bool>(t.degenerate[i]));
  }
  return csv.str();
}

std::string v_csv(const HarmonicEstimate& h) {
  Csv csv({"m", "v_hat", "se", "ci_lo", "ci_hi", "step_diff", "step_diff_se"});
  for (std::size_t i = 0; i < h.m_grid.size(); ++i) {
    const double diff = i == 0 ? 0.0 : h.step_diff[i - 1];
    const double dse = i == 0 ? 0.0 : h.step_diff_se[i - 1];
    csv.row(h.m_grid[i], h.v_hat[i], h.se[i], h.ci_lo[i], h.ci_hi[i], diff, dse);
  }
  return csv.str();
}

json beta_json(const BetaEstimate& b, double alpha) {
  return {{"beta_hat", b.beta_hat},
          {"se", b.se},
          {"ci", {b.ci_lo, b.ci_hi}},
          {"slope", b.slope},
          {"slope_se", b.slope_se},
          {"exponent", b.beta_hat / alpha},
          {"widened", b.widened},
          {"trend_p_value", b.trend_p_value},
          {"fit_horizons", b.fit_horizons}};
}

std::vector<std::int64_t> merged_grid(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::vector<std::int64_t> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

WalkConfig walk_config(const Run& r, const IncrementLaw& law, const Vec& start,
                       std::int64_t horizon, std::int64_t reps, std::uint64_t seed) {
  return WalkConfig{r.cone(), law, start, horizon, reps, seed};
}

// Closed form on the half-space, otherwise a survival-ratio profile.
PointFunction martin_function(Run& r, const IncrementLaw& law) {
  const auto p = r.params();
  if (r.half_space()) {
    return [p](std::span<const double> x) { return eval_martin_halfspace(p, x); };
  }
  const auto& m = r.cfg.martin;
  auto est = std::make_shared<MartinEstimate>(estimate_martin_profile(
      r.cone(), law, m.horizons, m.reps, r.seed("martin-profile"), r.threads, m.start_scale,
      std::max(m.angles, kProfileAngles)));
  r.results["martin_profile_beta"] = beta_json(est->beta, p.alpha());
  return [est](std::span<const double> x) { return est->eval(x); };
}

std::optional<BetaEstimate> try_beta(const SurvivalTable& t, double alpha) {
  try {
    return beta_from_survival(t, alpha);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// --- experiment bodies -----------------------------------------------------

void run_survival(Run& r, bool beta_kind) {
  const auto law = make_law(r.cfg);
  const auto& w = r.cfg.walk;
  const auto wc = walk_config(r, law, w.start, w.horizons.back(), w.reps, r.cfg.seed);
  const auto table = survival_curve(wc, w.horizons, r.threads);
  r.write("survival.csv", survival_csv(table));
  bool monotone = true;
  for (std::size_t i = 1; i < table.survivors.size(); ++i) {
    monotone = monotone && table.survivors[i] <= table.survivors[i - 1];
  }
  r.check("survival_monotone", monotone, "survivor counts non-increasing in n");
  const double alpha = r.cfg.stable.alpha;
  const auto beta = try_beta(table, alpha);
  if (!beta) {
    r.flag("beta_fit_unavailable: fewer than 3 horizons with survivors");
    if (beta_kind) r.check("beta_fit", false, "fewer than 3 horizons with survivors");
    return;
  }
  r.results["beta"] = beta_json(*beta, alpha);
  if (beta->widened) r.flag("beta_widened: under 100 survivors at the top horizon");
  r.check("residual_trend", beta->trend_p_value > 0.01,
          "top-decade residual trend p = " + format_double(beta->trend_p_value) + " (> 0.01)");
  if (!beta_kind) return;
  Csv fit({"n", "log_n", "residual"});
  for (std::size_t i = 0; i < beta->fit_horizons.size(); ++i) {
    fit.row(beta->fit_horizons[i], std::log(static_cast<double>(beta->fit_horizons[i])),
            beta->residuals[i]);
  }
  r.write("beta_fit.csv", fit.str());
  if (r.half_space()) {
    const double dev = std::abs(beta->beta_hat - 0.5 * alpha);
    r.check("beta_halfspace", dev <= 0.05,
            "|beta_hat - alpha/2| = " + format_double(dev) + " (<= 0.05)");
  }
}

void run_martin_profile(Run& r) {
  const auto law = make_law(r.cfg);
  const auto& w = r.cfg.walk;
  const auto& m = r.cfg.martin;
  const double alpha = r.cfg.stable.alpha;
  const int d = r.cfg.stable.dim;
  const auto e_d = unit_at_angle(d, 0.0);
  const auto table =
      survival_curve(walk_config(r, law, e_d, w.horizons.back(), w.reps, r.cfg.seed), w.horizons,
                     r.threads);
  r.write("survival.csv", survival_csv(table));
  const auto beta = beta_from_survival(table, alpha);
  r.results["beta"] = beta_json(beta, alpha);

  std::optional<MartinEstimate> profile;
  if (m.angles >= 2) {
    profile = estimate_martin_profile(r.cone(), law, m.horizons, m.reps, r.seed("martin-profile"),
                                      r.threads, m.start_scale, m.angles);
    Csv csv({"angle", "value", "ci_lo", "ci_hi", "non_plateau"});
    json prof = json::array();
    for (std::size_t j = 0; j < profile->angles.size(); ++j) {
      csv.row(profile->angles[j], profile->values[j], profile->ci_lo[j], profile->ci_hi[j],
              static_cast<bool>(profile->non_plateau[j]));
      prof.push_back({{"angle", profile->angles[j]},
                      {"value", profile->values[j]},
                      {"ci", {profile->ci_lo[j], profile->ci_hi[j]}},
                      {"non_plateau", static_cast<bool>(profile->non_plateau[j])}});
    }
    r.write("profile.csv", csv.str());
    json doc = {{"cone", {{"dim", d}, {"theta", r.cfg.cone.theta}}},
                {"params", {{"alpha", alpha}, {"dim", d}}},
                {"beta_hat", beta.beta_hat},
                {"ci", {beta.ci_lo, beta.ci_hi}},
                {"profile_beta_hat", profile->beta.beta_hat},
                {"profile", prof},
                {"seeds",
                 {{"master", r.cfg.seed},
                  {"survival", r.cfg.seed},
                  {"profile", r.seed("martin-profile")}}},
                {"reps", m.reps},
                {"start_scale", m.start_scale}};
    r.write("martin.json", doc.dump(2) + "\n");

    std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
    std::vector<double> angles;
    for (int j = 0; j < 8; ++j) angles.push_back(r.cfg.cone.theta * j / 8.0);
    const auto grid = sample_interior_grid(r.cone(), radii, angles);
    const auto env = check_michalik_envelope(r.cone(), r.params(),
                                             [&](std::span<const double> x) { return profile->eval(x); },
                                             beta.beta_hat, grid);
    r.results["envelope"] = {{"min_ratio", env.min_ratio}, {"max_ratio", env.max_ratio}};
    const double spread = env.min_ratio > 0.0 ? env.max_ratio / env.min_ratio : INFINITY;
    r.check("envelope_bounded", spread < 10.0,
            "max/min envelope ratio = " + format_double(spread) + " (< 10)");
    std::int64_t flagged = std::count(profile->non_plateau.begin(), profile->non_plateau.end(), true);
    if (flagged > 0) r.flag("profile_non_plateau: " + std::to_string(flagged) + " angles");
  }

  const auto run = estimate_martin_ratio(r.cone(), law, m.x, m.horizons, m.reps,
                                         r.seed("martin-ratio"), r.threads, m.start_scale);
  Csv csv({"n", "ratio", "se"});
  for (const auto& p : run.ratio.series) csv.row(p.n, p.ratio, p.se);
  r.write("ratio.csv", csv.str());
  double norm = 0.0;
  bool on_axis = true;
  for (int c = 0; c < d; ++c) {
    norm += m.x[c] * m.x[c];
    if (c + 1 < d && m.x[c] != 0.0) on_axis = false;
  }
  norm = std::sqrt(norm);
  json rj = {{"x", m.x},
             {"value", run.ratio.value},
             {"se", run.ratio.se},
             {"ci", {run.ratio.ci_lo, run.ratio.ci_hi}},
             {"non_plateau", run.ratio.non_plateau},
             {"seed", r.seed("martin-ratio")}};
  if (run.ratio.non_plateau) r.flag("ratio_non_plateau");
  if (on_axis) {
    const double target = std::pow(norm, beta.beta_hat);
    const double target_se = target * std::log(norm) * beta.se;
    const double joint = kZ95 * std::hypot(run.ratio.se, target_se);
    const double diff = run.ratio.value - target;
    rj["target"] = target;
    rj["target_se"] = target_se;
    r.check("homogeneity", std::abs(diff) <= joint,
            "M(x)/M(e_d) - |x|^beta_hat = " + format_double(diff) + ", joint 95% half-width " +
                format_double(joint));
  }
  r.results["ratio"] = rj;
}

void run_v_estimate(Run& r) {
  const auto law = make_law(r.cfg);
  const auto& w = r.cfg.walk;
  const auto m_eval = martin_function(r, law);
  const auto grid = merged_grid(w.horizons, r.cfg.v.m_grid);
  const auto wc = walk_config(r, law, w.start, grid.back(), w.reps, r.cfg.seed);
  const auto sv = survival_and_V(wc, w.horizons, r.cfg.v.m_grid, m_eval, r.threads);
  r.write("survival.csv", survival_csv(sv.survival));
  r.write("v.csv", v_csv(sv.harmonic));
  r.results["v"] = {{"x", w.start},
                    {"v_hat", sv.harmonic.v_hat.back()},
                    {"se", sv.harmonic.se.back()},
                    {"plateau", sv.harmonic.plateau}};
  if (!sv.harmonic.plateau) r.flag("v_non_plateau");

  const auto& h = r.cfg.harmonic;
  if (!h.enabled) return;
  const auto hc = walk_config(r, law, h.x, std::max<std::int64_t>(h.m_star, 1), h.reps,
                              r.seed("harmonic"));
  const auto res = harmonicity_residual(hc, h.x, h.m_star, h.inner_reps, h.outer_reps, m_eval,
                                        r.threads);
  Csv csv(concat(coord_header("x", r.cfg.stable.dim),
                 {"m_star", "inner_reps", "outer_reps", "v_hat", "v_se", "successor_mean",
                  "successor_se", "residual", "se", "inner_variance_share", "flagged"}));
  csv.row(concat(coord_cells(h.x),
                 {cell(h.m_star), cell(h.inner_reps), cell(h.outer_reps), cell(res.v_hat),
                  cell(res.v_se), cell(res.successor_mean), cell(res.successor_se),
                  cell(res.residual), cell(res.se), cell(res.inner_variance_share),
                  cell(res.flagged)}));
  r.write("harmonic.csv", csv.str());
  if (res.flagged) r.flag("harmonic_inner_noise_dominates");
  const double z = res.se > 0.0 ? res.residual / res.se : 0.0;
  r.check("harmonicity", std::abs(z) <= 3.0,
          "residual / se = " + format_double(z) + " (|z| <= 3)");
}

void run_kappa(Run& r) {
  const auto law = make_law(r.cfg);
  const auto& w = r.cfg.walk;
  const double alpha = r.cfg.stable.alpha;
  const int d = r.cfg.stable.dim;
  const auto m_eval = martin_function(r, law);
  const auto grid = merged_grid(w.horizons, r.cfg.v.m_grid);

  std::vector<SurvivalAndHarmonic> runs;
  for (std::size_t i = 0; i < r.cfg.kappa.starts.size(); ++i) {
    const auto wc = walk_config(r, law, r.cfg.kappa.starts[i], grid.back(), w.reps,
                                r.seed("kappa-start", i));
    runs.push_back(survival_and_V(wc, w.horizons, r.cfg.v.m_grid, m_eval, r.threads));
    r.write("survival_" + std::to_string(i) + ".csv", survival_csv(runs.back().survival));
    r.write("v_" + std::to_string(i) + ".csv", v_csv(runs.back().harmonic));
  }
  double beta_hat = 0.0;
  if (r.cfg.kappa.beta) {
    beta_hat = *r.cfg.kappa.beta;
  } else {
    const auto b = beta_from_survival(runs[0].survival, alpha);
    r.results["beta"] = beta_json(b, alpha);
    beta_hat = b.beta_hat;
  }
  r.results["beta_used"] = beta_hat;

  Csv summary(concat({"start"}, concat(coord_header("x", d),
                                       {"v_hat", "v_se", "plateau", "plateau_se", "drift",
                                        "non_plateau"})));
  std::vector<KappaEstimate> ks;
  json arr = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& hv = runs[i].harmonic;
    const auto k = estimate_kappa(runs[i].survival, hv.v_hat.back(), hv.se.back(), beta_hat, alpha);
    Csv csv({"n", "kappa", "lo", "hi"});
    for (const auto& p : k.series) csv.row(p.n, p.kappa, p.lo, p.hi);
    r.write("kappa_" + std::to_string(i) + ".csv", csv.str());
    summary.row(concat({cell(static_cast<std::int64_t>(i))},
                       concat(coord_cells(r.cfg.kappa.starts[i]),
                              {cell(hv.v_hat.back()), cell(hv.se.back()), cell(k.plateau),
                               cell(k.plateau_se), cell(k.max_rel_drift), cell(k.non_plateau)})));
    r.check("kappa_drift_" + std::to_string(i), k.max_rel_drift < kKappaDriftLimit,
            "top-decade drift = " + format_double(k.max_rel_drift) + " (< 0.10)");
    if (!hv.plateau) r.flag("v_non_plateau_" + std::to_string(i));
    arr.push_back({{"x", r.cfg.kappa.starts[i]},
                   {"v_hat", hv.v_hat.back()},
                   {"plateau", k.plateau},
                   {"plateau_se", k.plateau_se},
                   {"drift", k.max_rel_drift}});
    ks.push_back(k);
  }
  r.write("kappa_summary.csv", summary.str());
  for (std::size_t i = 1; i < ks.size(); ++i) {
    const double diff = ks[i].plateau - ks[0].plateau;
    const double joint = kZ95 * std::hypot(ks[i].plateau_se, ks[0].plateau_se);
    r.check("kappa_agreement_" + std::to_string(i), std::abs(diff) <= joint,
            "kappa difference = " + format_double(diff) + ", joint 95% half-width " +
                format_double(joint));
  }
  r.results["kappa"] = arr;

  if (r.half_space()) {
    CompensatorConfig cc = make_compensator_config(r.params());
    cc.epsilon = r.cfg.compensator.epsilon;
    cc.R = r.cfg.compensator.R;
    const UProfile u(cc);
    json ub = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double h = r.cfg.kappa.starts[i].back() + cc.R;
      const double wv = std::pow(h, 0.5 * alpha) + u(h);
      ub.push_back(survival_upper_bound_statistic(runs[i].survival, beta_hat, alpha, wv));
    }
    r.results["upper_bound_statistic"] = ub;
  }
}

void run_compensator(Run& r) {
  const auto law = make_law(r.cfg);
  const auto p = r.params();
  const auto& cb = r.cfg.compensator;
  const int d = p.dim();
  CompensatorConfig cc{p, cb.epsilon, cb.R, 0.0, cb.mc_samples};
  cc.validate();
  const UProfile u(cc);

  std::vector<DriftResult> drifts;
  double margin = INFINITY;
  for (std::size_t i = 0; i < cb.ladder.size(); ++i) {
    Vec x(static_cast<std::size_t>(d), 0.0);
    x.back() = cb.ladder[i];
    drifts.push_back(error_drift_check(cc, law, u, x, r.seed("drift-ladder", i), r.threads));
    margin = std::min(margin, -drifts.back().drift / drifts.back().lambda);
    if (drifts.back().flagged) r.flag("drift_se_large_" + std::to_string(i));
  }
  const double c = cb.c ? *cb.c : std::max(0.0, 0.5 * margin);
  cc.c = c;
  r.results["margin"] = margin;
  r.results["c"] = c;

  Csv dcsv(concat(coord_header("x", d), {"delta", "drift", "se", "lambda", "verdict"}));
  bool all_negative = true;
  for (std::size_t i = 0; i < drifts.size(); ++i) {
    const auto& dr = drifts[i];
    const bool neg = dr.drift + c * dr.lambda < -2.0 * dr.se;
    all_negative = all_negative && neg;
    Vec x(static_cast<std::size_t>(d), 0.0);
    x.back() = cb.ladder[i];
    dcsv.row(concat(coord_cells(x), {cell(dr.delta), cell(dr.drift), cell(dr.se), cell(dr.lambda),
                                     std::string(neg ? "negative" : "not-negative")}));
  }
  r.write("drift.csv", dcsv.str());
  // smallest ladder height from which every deeper point passes, at this R
  json smallest = nullptr;
  for (std::size_t i = drifts.size(); i-- > 0;) {
    if (!(drifts[i].drift + c * drifts[i].lambda < -2.0 * drifts[i].se)) break;
    smallest = cb.ladder[i];
  }
  r.results["R"] = cb.R;
  r.results["smallest_passing_delta"] = smallest;
  r.check("drift_negative", all_negative,
          "drift + c*Lambda < -2 se at every ladder point, c = " + format_double(c));

  Csv lcsv({"height", "u", "m", "u_scaled", "f", "f_scaled"});
  std::vector<double> us, fs_;
  for (double h : cb.ladder) {
    const double uq = u_lambda_quadrature(cc, h).value;
    const double m = std::pow(h, 0.5 * p.alpha());
    const double f = error_function_quadrature(p, h).value;
    const double u_scaled = uq * std::pow(h, 0.5 * cc.epsilon) / m;
    const double f_scaled = std::abs(f) * std::pow(h, p.alpha() + cc.epsilon) / m;
    us.push_back(u_scaled);
    fs_.push_back(f_scaled);
    lcsv.row(h, uq, m, u_scaled, f, f_scaled);
  }
  r.write("ladder.csv", lcsv.str());
  const double u_max = *std::max_element(us.begin(), us.end());
  const double f_max = *std::max_element(fs_.begin(), fs_.end());
  r.check("u_scaled_bounded", u_max <= 2.0 * us.front(),
          "max U delta^{eps/2}/M = " + format_double(u_max) + " (<= 2x the first ladder value " +
              format_double(us.front()) + ")");
  bool non_increasing = true;
  for (std::size_t i = 1; i < us.size(); ++i) non_increasing = non_increasing && us[i] <= us[i - 1];
  std::string seq;
  for (double v : us) seq += (seq.empty() ? "" : " ") + format_double(v);
  r.check("u_scaled_non_increasing", non_increasing, "U delta^{eps/2}/M along the ladder: " + seq);
  r.check("f_scaled_bounded", f_max <= 2.0 * fs_.front(),
          "max |f| delta^{alpha+eps}/M = " + format_double(f_max) +
              " (<= 2x the first ladder value " + format_double(fs_.front()) + ")");

  if (cb.trace_reps > 0) {
    TraceOptions opt;
    opt.n_steps = cb.trace_steps;
    opt.reps = cb.trace_reps;
    Vec x(static_cast<std::size_t>(d), 0.0);
    x.back() = cb.ladder.front();
    const auto tr = supermartingale_trace(cc, law, u, x, opt, r.seed("trace"), r.threads);
    Csv tcsv({"delta_bin", "norm_bin", "count", "mean", "se", "exceeds", "undersampled"});
    for (const auto& cell_ : tr.cells) {
      tcsv.row(cell_.delta_bin, cell_.norm_bin, cell_.count, cell_.mean, cell_.se, cell_.exceeds,
               cell_.undersampled);
    }
    r.write("trace.csv", tcsv.str());
    Csv pcsv({"path", "n", "y", "alive", "lambda_sum"});
    for (std::size_t i = 0; i < tr.logged.size(); ++i) {
      const auto& lp = tr.logged[i];
      for (std::size_t n = 0; n < lp.y.size(); ++n) {
        pcsv.row(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n), lp.y[n],
                 static_cast<bool>(lp.alive[n]), lp.lambda_sum[n]);
      }
    }
    r.write("trace_paths.csv", pcsv.str());
    r.check("supermartingale_cells", tr.exceeding_cells == 0,
            std::to_string(tr.exceeding_cells) + " sampled cells above +2 se (" +
                std::to_string(tr.undersampled_cells) + " undersampled)");
  }
}

std::string meander_csv(const MeanderSample& s) {
  Csv csv(concat({"path_index", "j", "t"}, coord_header("y", s.dim)));
  for (std::int64_t i = 0; i < s.accepted; ++i) {
    for (int j = 0; j <= s.k; ++j) {
      csv.row(concat({cell(s.path_index[static_cast<std::size_t>(i)]), cell(j),
                      cell(s.times[static_cast<std::size_t>(j)])},
                     coord_cells(s.point(i, j))));
    }
  }
  return csv.str();
}

std::string max_csv(const MeanderSample& s) {
  Csv csv({"path_index", "max_modulus"});
  for (std::int64_t i = 0; i < s.accepted; ++i) {
    csv.row(s.path_index[static_cast<std::size_t>(i)], s.max_modulus[static_cast<std::size_t>(i)]);
  }
  return csv.str();
}

json sample_json(const MeanderSample& s, double theta, std::uint64_t seed) {
  const auto st = endpoint_stats(s, theta, 8, 500, seed);
  return {{"accepted", s.accepted},
          {"proposed", s.proposed},
          {"acceptance_rate", s.acceptance_rate()},
          {"partial", s.partial},
          {"quantile_levels", st.probs},
          {"radius_quantiles", st.radius_quantiles},
          {"last_coord_quantiles", st.last_coord_quantiles},
          {"max_modulus_quantiles", st.max_modulus_quantiles},
          {"angle_edges", st.angle_edges},
          {"angle_counts", st.angle_counts},
          {"radius_median_ci", {st.radius_median_lo, st.radius_median, st.radius_median_hi}}};
}

void run_meander_invariance(Run& r) {
  const auto& m = r.cfg.meander;
  const auto& w = r.cfg.walk;
  const auto p = r.params();
  const auto exact = IncrementLaw::exact(p);
  const auto other = make_law(r.cfg);
  const auto wa = walk_config(r, exact, w.start, m.n, w.reps, r.seed("meander-a"));
  const auto wb = walk_config(r, other, w.start, m.n, w.reps, r.seed("meander-b"));
  auto a = sample_conditioned(wa, m.n, m.k, m.target, r.threads);
  auto b = sample_conditioned(wb, m.n, m.k, m.target, r.threads);
  r.write("meander_a.csv", meander_csv(a));
  r.write("meander_a_max.csv", max_csv(a));
  r.write("meander_b.csv", meander_csv(b));
  r.write("meander_b_max.csv", max_csv(b));
  r.results["sample_a"] = sample_json(a, r.cfg.cone.theta, r.seed("bootstrap-a"));
  r.results["sample_b"] = sample_json(b, r.cfg.cone.theta, r.seed("bootstrap-b"));
  if (a.partial || b.partial) r.flag("partial_sample");

  Csv csv({"comparison", "projection", "statistic", "p_value"});
  auto emit = [&](const std::string& name, const InvarianceResult& res) {
    csv.row(name, std::string("radius"), res.radius.statistic, res.radius.p_value);
    csv.row(name, std::string("last_coord"), res.last_coord.statistic, res.last_coord.p_value);
    csv.row(name, std::string("max_modulus"), res.max_modulus.statistic, res.max_modulus.p_value);
  };
  std::optional<MeanderSample> a_copy;
  if (m.control_alpha) a_copy = a;
  const auto inv = compare_meanders(std::move(a), std::move(b));
  emit("exact_vs_law", inv);
  r.check("invariance", inv.pass,
          "KS p radius = " + format_double(inv.radius.p_value) + ", last coordinate = " +
              format_double(inv.last_coord.p_value) + " (each > 0.005)");
  if (m.control_alpha) {
    const auto cl = IncrementLaw::exact(StableParams(*m.control_alpha, p.dim()));
    const auto wc = walk_config(r, cl, w.start, m.n, w.reps, r.seed("meander-c"));
    auto cs = sample_conditioned(wc, m.n, m.k, m.target, r.threads);
    r.results["sample_control"] = sample_json(cs, r.cfg.cone.theta, r.seed("bootstrap-c"));
    if (cs.partial) r.flag("partial_control_sample");
    const auto ctl = compare_meanders(std::move(*a_copy), std::move(cs));
    emit("exact_vs_control", ctl);
    r.check("control_rejects", !ctl.pass,
            "control alpha = " + format_double(*m.control_alpha) + ": KS p radius = " +
                format_double(ctl.radius.p_value) + ", last coordinate = " +
                format_double(ctl.last_coord.p_value));
  }
  r.write("invariance.csv", csv.str());
}

void run_tightness(Run& r) {
  const auto law = make_law(r.cfg);
  const auto& m = r.cfg.meander;
  const auto& w = r.cfg.walk;
  const double alpha = r.cfg.stable.alpha;
  double beta_hat = 0.0;
  if (r.cfg.tightness.beta) {
    beta_hat = *r.cfg.tightness.beta;
  } else {
    const auto table = survival_curve(
        walk_config(r, law, w.start, w.horizons.back(), std::min<std::int64_t>(w.reps, 1000000),
                    r.cfg.seed),
        w.horizons, r.threads);
    const auto b = beta_from_survival(table, alpha);
    r.results["beta"] = beta_json(b, alpha);
    beta_hat = b.beta_hat;
  }
  const auto wc = walk_config(r, law, w.start, m.n, w.reps, r.seed("tightness"));
  const auto s = sample_conditioned(wc, m.n, m.k, m.target, r.threads);
  if (s.partial) r.flag("partial_sample");
  const auto& t = r.cfg.tightness;
  const auto res = tightness_check(s, t.a_grid, beta_hat, t.fit_lo, t.fit_hi);
  Csv csv({"A", "exceed", "p", "bound", "flagged"});
  for (const auto& row : res.rows) csv.row(row.A, row.exceed, row.p, row.bound, row.flagged);
  r.write("tightness.csv", csv.str());
  r.write("meander_max.csv", max_csv(s));
  r.results["tightness"] = {{"accepted", s.accepted},
                            {"proposed", s.proposed},
                            {"beta_used", beta_hat},
                            {"slope", res.slope},
                            {"slope_se", res.slope_se},
                            {"target_slope", res.target_slope},
                            {"constant", res.constant}};
  const double dev = std::abs(res.slope - res.target_slope);
  r.check("tail_slope", std::isfinite(dev) && dev <= 0.15,
          "fitted slope = " + format_double(res.slope) + ", target = " +
              format_double(res.target_slope) + " (within 0.15)");
}

void run_kernel_verify(Run& r) {
  const auto& k = r.cfg.kernel;
  Csv norm({"alpha", "dim", "q", "mass", "abs_error", "deviation"});
  double worst = 0.0;
  for (double a : k.alphas) {
    for (int d : k.dims) {
      const StableParams p(a, d);
      for (double q : k.q) {
        const auto m = poisson_ball_mass(p, 1.0, q);
        worst = std::max(worst, std::abs(m.value - 1.0));
        norm.row(a, d, q, m.value, m.abs_error, m.value - 1.0);
      }
    }
  }
  r.write("poisson_normalization.csv", norm.str());
  r.check("poisson_normalization", worst < 1e-6,
          "max |mass - 1| = " + format_double(worst) + " (< 1e-6)");

  Csv ks({"alpha", "dim", "q", "samples", "ks_distance", "p_value"});
  double worst_ks = 0.0;
  std::uint64_t case_index = 0;
  for (double a : k.alphas) {
    for (int d : k.dims) {
      const StableParams p(a, d);
      for (double q : k.q) {
        const std::uint64_t key = r.seed("ball-exit", case_index++);
        Vec theta(static_cast<std::size_t>(d), 0.0);
        theta.back() = q;
        auto chunks = parallel_chunks<std::vector<double>>(
            k.exit_samples, r.threads, [&](std::int64_t b, std::int64_t e) {
              std::vector<double> out;
              Vec w(static_cast<std::size_t>(d));
              for (std::int64_t i = b; i < e; ++i) {
                RngStream rng(key, "sample", static_cast<std::uint64_t>(i));
                sample_ball_exit(p, 1.0, theta, rng, w);
                double s = 0.0;
                for (double v : w) s += v * v;
                out.push_back(std::sqrt(s));
              }
              return out;
            });
        std::vector<double> radii;
        for (const auto& c : chunks) radii.insert(radii.end(), c.begin(), c.end());
        // exact CDF at 2000 order statistics, linear in between
        auto sorted = radii;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> nx, ny;
        const std::size_t nodes = 2000;
        for (std::size_t j = 0; j <= nodes; ++j) {
          const double x = sorted[(sorted.size() - 1) * j / nodes];
          if (!nx.empty() && x <= nx.back()) continue;
          nx.push_back(x);
          ny.push_back(poisson_ball_mass(p, 1.0, q, x).value);
        }
        auto cdf = [&](double x) {
          if (x <= nx.front() || x >= nx.back()) return poisson_ball_mass(p, 1.0, q, x).value;
          const auto j = static_cast<std::size_t>(std::upper_bound(nx.begin(), nx.end(), x) - nx.begin());
          const double t = (x - nx[j - 1]) / (nx[j] - nx[j - 1]);
          return ny[j - 1] + t * (ny[j] - ny[j - 1]);
        };
        const auto res = ks_one_sample(radii, cdf);
        worst_ks = std::max(worst_ks, res.statistic);
        ks.row(a, d, q, k.exit_samples, res.statistic, res.p_value);
      }
    }
  }
  r.write("ball_exit_ks.csv", ks.str());
  r.check("ball_exit_ks", worst_ks < 0.01,
          "max KS distance to the quadrature CDF = " + format_double(worst_ks) + " (< 0.01)");

  Csv green({"alpha", "dim", "pairs", "min_ratio", "max_ratio", "spread"});
  bool green_ok = true;
  for (double a : k.alphas) {
    for (int d : k.dims) {
      if (!(d > a)) continue;
      const StableParams p(a, d);
      const GreenHalfspace g(p);
      double lo = INFINITY, hi = 0.0;
      for (std::int64_t i = 0; i < k.green_pairs; ++i) {
        RngStream rng(r.cfg.seed, "green-pairs", static_cast<std::uint64_t>(i));
        Vec x(static_cast<std::size_t>(d), 0.0), y(static_cast<std::size_t>(d), 0.0);
        x.back() = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        y.back() = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        for (int c = 0; c + 1 < d; ++c) {
          y[c] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        }
        if (x == y) continue;
        const double ratio = green_halfspace(g, x, y) / green_envelope_halfspace(p, x, y);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      green_ok = green_ok && lo >= 1.0 / 50.0 && hi <= 50.0;
      green.row(a, d, k.green_pairs, lo, hi, hi / lo);
    }
  }
  r.write("green_envelope.csv", green.str());
  r.check("green_envelope", green_ok, "G / envelope within [1/50, 50] for every (alpha, d)");

  const int d = r.cfg.stable.dim;
  Csv ids({"alpha", "identity", "argument", "estimate", "exact", "se", "z"});
  double worst_z = 0.0;
  for (std::size_t ai = 0; ai < k.alphas.size(); ++ai) {
    const double a = k.alphas[ai];
    const StableParams p(a, d);
    const auto law = IncrementLaw::exact(p);
    const std::array<double, 3> lambdas{1.0, 2.0, 4.0};
    const std::array<double, 3> xis{0.5, 1.0, 2.0};
    struct Acc {
      std::array<Moments, 3> lap;
      std::array<Moments, 3> cf;
    };
    const std::uint64_t key = r.seed("identities", ai);
    auto chunks = parallel_chunks<Acc>(k.identity_samples, r.threads,
                                       [&](std::int64_t b, std::int64_t e) {
                                         Acc acc;
                                         Vec z(static_cast<std::size_t>(d));
                                         for (std::int64_t i = b; i < e; ++i) {
                                           RngStream rng(key, "draw", static_cast<std::uint64_t>(i));
                                           const double A = sample_positive_stable(0.5 * a, rng);
                                           sample_isotropic_increment(law, rng, z);
                                           for (int j = 0; j < 3; ++j) {
                                             acc.lap[j].add(std::exp(-lambdas[j] * A));
                                             acc.cf[j].add(std::cos(xis[j] * z[0]));
                                           }
                                         }
                                         return acc;
                                       });
    Acc total;
    for (const auto& c : chunks) {
      for (int j = 0; j < 3; ++j) {
        total.lap[j].merge(c.lap[j]);
        total.cf[j].merge(c.cf[j]);
      }
    }
    for (int j = 0; j < 3; ++j) {
      const double el = std::exp(-std::pow(lambdas[j], 0.5 * a));
      const double zl = (total.lap[j].mean() - el) / total.lap[j].se();
      ids.row(a, std::string("laplace"), lambdas[j], total.lap[j].mean(), el, total.lap[j].se(), zl);
      const double ec = std::exp(-std::pow(xis[j], a));
      const double zc = (total.cf[j].mean() - ec) / total.cf[j].se();
      ids.row(a, std::string("char_fn"), xis[j], total.cf[j].mean(), ec, total.cf[j].se(), zc);
      worst_z = std::max({worst_z, std::abs(zl), std::abs(zc)});
    }
  }
  r.write("identities.csv", ids.str());
  r.check("sampler_identities", worst_z < 3.0, "max |z| = " + format_double(worst_z) + " (< 3)");
}

json manifest_json(const RunManifest& m) {
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  return {{"experiment", m.experiment},
          {"kind", m.kind},
          {"config_digest", m.config_digest},
          {"seed", m.seed},
          {"stream_scheme", m.stream_scheme},
          {"started", m.started},
          {"finished", m.finished},
          {"outputs", outs},
          {"tool_version", m.tool_version}};
}

void write_manifest_atomic(const fs::path& dir, const RunManifest& m) {
  const auto tmp = dir / "manifest.json.tmp";
  write_file(tmp, manifest_json(m).dump(2) + "\n");
  fs::rename(tmp, dir / "manifest.json");
}

}  // namespace

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, int threads) {
  validate_config(cfg);
  fs::create_directories(out_dir);
  const std::string config_text = serialize_config(cfg);
  RunManifest man;
  man.experiment = cfg.name;
  man.kind = std::string(kind_name(cfg.experiment));
  man.config_digest = sha256_hex(config_text);
  man.seed = cfg.seed;
  man.stream_scheme = std::string(kStreamScheme);
  man.tool_version = std::string(kToolVersion);
  man.started = utc_now();

  Run run(cfg, out_dir, threads);
  run.write("config.json", config_text);
  switch (cfg.experiment) {
    case ExperimentKind::survival: run_survival(run, false); break;
    case ExperimentKind::beta: run_survival(run, true); break;
    case ExperimentKind::martin_profile: run_martin_profile(run); break;
    case ExperimentKind::v_estimate: run_v_estimate(run); break;
    case ExperimentKind::kappa: run_kappa(run); break;
    case ExperimentKind::compensator: run_compensator(run); break;
    case ExperimentKind::meander_invariance: run_meander_invariance(run); break;
    case ExperimentKind::tightness: run_tightness(run); break;
    case ExperimentKind::kernel_verify: run_kernel_verify(run); break;
  }

  json checks = json::array();
  for (const auto& c : run.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  json summary = {{"experiment", cfg.name},
                  {"kind", man.kind},
                  {"seed", cfg.seed},
                  {"results", run.results},
                  {"checks", checks},
                  {"flags", run.flags}};
  run.write("summary.json", summary.dump(2) + "\n");
  man.outputs = run.outputs;
  man.finished = utc_now();
  write_manifest_atomic(out_dir, man);
  return {man, run.checks, run.flags};
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

RunManifest read_manifest(const fs::path& manifest_path) {
  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid manifest " + manifest_path.string() + ": " + e.what());
  }
  RunManifest m;
  m.experiment = j.at("experiment").get<std::string>();
  m.kind = j.at("kind").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.stream_scheme = j.at("stream_scheme").get<std::string>();
  m.started = j.at("started").get<std::string>();
  m.finished = j.at("finished").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  for (const auto& o : j.at("outputs")) {
    m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                         o.at("bytes").get<std::uint64_t>()});
  }
  return m;
}

std::vector<std::string> verify_manifest(const fs::path& manifest_path) {
  const auto m = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<std::string> bad;
  for (const auto& o : m.outputs) {
    const auto p = dir / o.path;
    if (!fs::exists(p) || sha256_file(p) != o.sha256) bad.push_back(o.path);
  }
  return bad;
}

// --- plot data ---------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("column " + name + " missing");
    return static_cast<std::size_t>(it - header.begin());
  }
  double num(std::size_t r, const std::string& name) const {
    return std::stod(rows[r][col(name)]);
  }
};

Table read_csv(const fs::path& p) {
  std::istringstream in(read_file(p));
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

}  // namespace

RunManifest emit_plot_data(const fs::path& manifest_path, std::string_view which,
                           const fs::path& out_dir) {
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("missing upstream manifest " + manifest_path.string());
  }
  const auto up = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  auto has = [&](const std::string& name) {
    return std::any_of(up.outputs.begin(), up.outputs.end(),
                       [&](const OutputFile& o) { return o.path == name; }) &&
           fs::exists(dir / name);
  };
  auto need = [&](const std::string& name) {
    if (!has(name)) {
      throw std::runtime_error("missing upstream output " + name + " in " + manifest_path.string());
    }
    return dir / name;
  };
  const json summary = json::parse(read_file(need("summary.json")));

  fs::create_directories(out_dir);
  RunManifest man;
  man.experiment = up.experiment + "-plot-" + std::string(which);
  man.kind = "plot-" + std::string(which);
  man.config_digest = up.config_digest;
  man.seed = up.seed;
  man.stream_scheme = up.stream_scheme;
  man.tool_version = std::string(kToolVersion);
  man.started = utc_now();
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(out_dir / name, content);
    man.outputs.push_back({name, sha256_hex(content), content.size()});
  };
  std::string slopes;

  if (which == "survival") {
    const auto t = read_csv(need("survival.csv"));
    Csv csv({"x", "y", "ci_lo", "ci_hi"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      csv.row(t.num(i, "n"), t.num(i, "p_hat"), t.num(i, "ci_lo"), t.num(i, "ci_hi"));
    }
    emit("plot_survival.csv", csv.str());
    const auto& res = summary.at("results");
    if (!res.contains("beta")) {
      throw std::runtime_error("missing upstream beta fit in summary.json (no survivors to fit)");
    }
    const auto& b = res.at("beta");
    const double alpha = b.at("beta_hat").get<double>() / b.at("exponent").get<double>();
    const double s = -b.at("exponent").get<double>();
    const double lo = -b.at("ci").at(1).get<double>() / alpha;
    const double hi = -b.at("ci").at(0).get<double>() / alpha;
    slopes += "survival_slope " + format_double(s) + " ci " + format_double(lo) + " " +
              format_double(hi) + "  # -beta_hat/alpha\n";
  } else if (which == "kappa") {
    if (!has("kappa_0.csv")) need("kappa_0.csv");
    for (int i = 0; has("kappa_" + std::to_string(i) + ".csv"); ++i) {
      const auto t = read_csv(need("kappa_" + std::to_string(i) + ".csv"));
      Csv csv({"n", "kappa", "lo", "hi"});
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        csv.row(t.num(r, "n"), t.num(r, "kappa"), t.num(r, "lo"), t.num(r, "hi"));
      }
      emit("plot_kappa_" + std::to_string(i) + ".csv", csv.str());
      const auto& k = summary.at("results").at("kappa").at(static_cast<std::size_t>(i));
      const double pl = k.at("plateau").get<double>();
      const double se = k.at("plateau_se").get<double>();
      slopes += "kappa_plateau_" + std::to_string(i) + " " + format_double(pl) + " ci " +
                format_double(pl - kZ95 * se) + " " + format_double(pl + kZ95 * se) + "\n";
    }
  } else if (which == "tightness") {
    const auto t = read_csv(need("tightness.csv"));
    const auto& res = summary.at("results").at("tightness");
    const auto n = res.at("accepted").get<std::int64_t>();
    Csv csv({"x", "y", "ci_lo", "ci_hi"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto ex = static_cast<std::int64_t>(t.num(i, "exceed"));
      const auto ci = wilson_interval(ex, n);
      csv.row(t.num(i, "A"), t.num(i, "p"), ci.lo, ci.hi);
    }
    emit("plot_tightness.csv", csv.str());
    const double slope = res.at("slope").get<double>();
    const double se = res.at("slope_se").get<double>();
    slopes += "tightness_target_slope " + format_double(res.at("target_slope").get<double>()) +
              "  # -(alpha - beta)\n";
    slopes += "tightness_fitted_slope " + format_double(slope) + " ci " +
              format_double(slope - kZ95 * se) + " " + format_double(slope + kZ95 * se) + "\n";
  } else {
    throw std::invalid_argument("plot data kind must be survival, kappa or tightness");
  }
  emit("reference_slopes.txt", slopes);
  man.finished = utc_now();
  write_manifest_atomic(out_dir, man);
  return man;
}

}  // namespace stablecone
