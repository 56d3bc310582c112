// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes or the only failing checks are
// the documented known failures listed below, 1 otherwise.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stablecone/experiments.hpp"
#include "stablecone/martin.hpp"

namespace sc = stablecone;
namespace fs = std::filesystem;

namespace {

// (criterion, check name) pairs that fail for reasons recorded in the README.
const std::set<std::pair<int, std::string>> kKnownFailures = {
    {8, "u_scaled_non_increasing"},
    {11, "tail_slope"},
};

struct Outcome {
  std::vector<sc::CheckResult> checks;
  std::string note;
};

struct Context {
  fs::path root;
  int threads = 0;

  sc::RunResult run(const std::string& tag, const std::string& json) const {
    return sc::run_experiment(sc::parse_config(json), root / tag, threads);
  }
};

std::vector<sc::CheckResult> pick(const sc::RunResult& r, std::initializer_list<std::string_view> prefixes) {
  std::vector<sc::CheckResult> out;
  for (const auto& c : r.checks) {
    for (auto p : prefixes) {
      if (c.name.rfind(p, 0) == 0) {
        out.push_back(c);
        break;
      }
    }
  }
  if (out.empty()) out.push_back({"missing", false, "expected checks were not produced"});
  return out;
}

// Full kernel verification covers criteria 2 and 9; it runs once.
const sc::RunResult& kernel_run(const Context& ctx) {
  static std::optional<sc::RunResult> cached;
  if (!cached) {
    cached = ctx.run("kernel-verify", R"({"experiment":"kernel-verify","seed":101,"kernel":{
        "alphas":[0.7,1.5],"dims":[1,2,3],"q":[0,0.5,0.9],
        "exit_samples":100000,"identity_samples":1000000,"green_pairs":1000}})");
  }
  return *cached;
}

// The identities run on their own so that their wall time can be checked;
// the kernel and exit parts are cut to a token size here.
Outcome c1(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = ctx.run("identities", R"({"experiment":"kernel-verify","seed":101,
      "stable":{"dim":2},"kernel":{"alphas":[0.7,1.5],"dims":[2],"q":[0],
      "exit_samples":1000,"identity_samples":1000000,"green_pairs":1}})");
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto checks = pick(r, {"sampler_identities"});
  checks.push_back({"runtime", s < 60.0, "wall time " + sc::format_double(std::round(s * 10.0) / 10.0) + " s (< 60)"});
  return {checks, ""};
}

Outcome c2(const Context& ctx) {
  return {pick(kernel_run(ctx), {"poisson_normalization", "ball_exit_ks"}), ""};
}

Outcome c3(const Context& ctx) {
  const auto r = ctx.run("beta", R"({"experiment":"beta","seed":103,
      "stable":{"alpha":1.5,"dim":2},
      "walk":{"reps":1000000,"horizons":[64,128,256,512,1024,2048,4096,8192,16384]}})");
  return {pick(r, {"beta_halfspace"}), ""};
}

Outcome c4(const Context&) {
  const sc::StableParams p(1.5, 2);
  const sc::ConeSpec half(2, std::numbers::pi / 2);
  const sc::PointFunction m = [&](std::span<const double> y) { return sc::eval_martin_halfspace(p, y); };
  std::vector<sc::CheckResult> checks;
  const std::vector<std::pair<sc::Vec, double>> cases = {{{0.0, 2.0}, 1.0}, {{0.5, 1.0}, 0.9}, {{-3.0, 5.0}, 4.0}};
  int i = 0;
  for (const auto& [x, radius] : cases) {
    const auto res = sc::check_mean_value(half, p, m, x, radius, 100000, sc::substream_key(104, "mean-value", i));
    const double z = res.residual / res.se;
    checks.push_back({"mean_value_" + std::to_string(i), std::abs(z) <= 3.0,
                      "residual " + sc::format_double(res.residual) + ", z = " + sc::format_double(z)});
    ++i;
  }
  return {checks, ""};
}

Outcome c5(const Context& ctx) {
  const auto r = ctx.run("martin-profile", R"({"experiment":"martin-profile","seed":105,
      "stable":{"alpha":1.5,"dim":2},"cone":{"theta":0.7853981633974483},
      "walk":{"reps":1000000,"horizons":[64,128,256,512,1024,2048,4096,8192,16384]},
      "martin":{"angles":0,"start_scale":16,"reps":300000,
                "horizons":[16,32,64,128,256,512,1024,2048,4096,8192]}})");
  return {pick(r, {"homogeneity"}), ""};
}

Outcome c6(const Context& ctx) {
  const auto r = ctx.run("kappa", R"({"experiment":"kappa","seed":106,
      "stable":{"alpha":1.5,"dim":2},"walk":{"reps":300000}})");
  return {pick(r, {"kappa_drift", "kappa_agreement"}), ""};
}

Outcome c7(const Context& ctx) {
  const auto r = ctx.run("v-estimate", R"({"experiment":"v-estimate","seed":107,
      "stable":{"alpha":1.5,"dim":2},
      "harmonic":{"x":[0,2],"m_star":64,"inner_reps":8,"outer_reps":20000,"reps":200000}})");
  return {pick(r, {"harmonicity"}), ""};
}

Outcome c8(const Context& ctx) {
  const auto r = ctx.run("compensator", R"({"experiment":"compensator","seed":108,
      "stable":{"alpha":1.5,"dim":2},
      "compensator":{"R":8,"ladder":[4,8,16,32],"mc_samples":2000000}})");
  return {pick(r, {"drift_negative", "u_scaled_bounded", "u_scaled_non_increasing"}), ""};
}

Outcome c9(const Context& ctx) { return {pick(kernel_run(ctx), {"green_envelope"}), ""}; }

Outcome c10(const Context& ctx) {
  const auto r = ctx.run("meander-invariance", R"({"experiment":"meander-invariance","seed":110,
      "stable":{"alpha":1.5,"dim":2},"law":{"kind":"perturbed"},
      "meander":{"n":4096,"target":2000,"control_alpha":0.7}})");
  return {pick(r, {"invariance", "control_rejects"}), ""};
}

Outcome c11(const Context& ctx) {
  const auto r = ctx.run("tightness", R"({"experiment":"tightness","seed":111,
      "stable":{"alpha":1.5,"dim":2},"meander":{"n":4096,"target":2000}})");
  return {pick(r, {"tail_slope"}), ""};
}

// Small configurations of every kind, run twice single-threaded and once on
// eight workers; all output digests must coincide.
Outcome c12(const Context& ctx) {
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"survival", R"({"experiment":"survival","seed":12,"walk":{"reps":20000,"horizons":[16,64,256]}})"},
      {"beta", R"({"experiment":"beta","seed":12,"walk":{"reps":100000,"horizons":[16,32,64,128,256]}})"},
      {"martin-profile", R"({"experiment":"martin-profile","seed":12,"cone":{"theta":1.0},
          "walk":{"reps":100000,"horizons":[16,32,64,128,256]},
          "martin":{"angles":4,"reps":5000,"horizons":[16,32,64,128,256]}})"},
      {"v-estimate", R"({"experiment":"v-estimate","seed":12,"walk":{"reps":10000,"horizons":[16,64]},
          "v":{"m_grid":[0,4,16]},"harmonic":{"m_star":8,"inner_reps":2,"outer_reps":2000,"reps":10000}})"},
      {"kappa", R"({"experiment":"kappa","seed":12,"walk":{"reps":10000,"horizons":[16,32,64,128,256]},
          "v":{"m_grid":[0,4,16,64]}})"},
      {"compensator", R"({"experiment":"compensator","seed":12,
          "compensator":{"mc_samples":20000,"trace_reps":2000,"trace_steps":4}})"},
      {"meander-invariance", R"({"experiment":"meander-invariance","seed":12,"law":{"kind":"perturbed"},
          "walk":{"reps":200000},"meander":{"n":64,"target":200}})"},
      {"tightness", R"({"experiment":"tightness","seed":12,"walk":{"reps":200000},"meander":{"n":64,"target":300}})"},
      {"kernel-verify", R"({"experiment":"kernel-verify","seed":12,"kernel":{"alphas":[1.5],"dims":[2],
          "q":[0,0.5],"exit_samples":5000,"identity_samples":20000,"green_pairs":50}})"},
  };
  std::vector<sc::CheckResult> checks;
  for (const auto& [kind, json] : configs) {
    const auto cfg = sc::parse_config(json);
    std::vector<std::vector<sc::OutputFile>> runs;
    for (const auto& [suffix, t] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"t8", 8}}) {
      runs.push_back(sc::run_experiment(cfg, ctx.root / "determinism" / (kind + "-" + suffix), t).manifest.outputs);
    }
    bool same = true;
    std::string first_diff;
    for (std::size_t k = 1; k < runs.size(); ++k) {
      if (runs[k].size() != runs[0].size()) {
        same = false;
        first_diff = "output count";
        continue;
      }
      for (std::size_t j = 0; j < runs[0].size(); ++j) {
        if (runs[k][j].path != runs[0][j].path || runs[k][j].sha256 != runs[0][j].sha256) {
          same = false;
          if (first_diff.empty()) first_diff = runs[0][j].path;
        }
      }
    }
    checks.push_back({"identical_" + kind, same,
                      same ? std::to_string(runs[0].size()) + " outputs identical over 3 runs"
                           : "differs at " + first_diff});
  }
  return {checks, ""};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  int threads = 0;
  std::string out_dir;
  std::vector<int> only;
  std::string report_path;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--out-dir", out_dir, "Keep run outputs here (default: a temporary directory)");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 12));
  app.add_option("--report", report_path, "Also write the PASS/FAIL lines to this file");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.threads = threads;
  const bool keep = !out_dir.empty();
  ctx.root = keep ? fs::path(out_dir) : fs::temp_directory_path() / "stablecone-acceptance";
  if (!keep) fs::remove_all(ctx.root);
  fs::create_directories(ctx.root);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria = {
      {"sampler identities", c1},          {"Poisson kernel and ball exit", c2},
      {"half-space exponent", c3},         {"Martin kernel mean value", c4},
      {"homogeneity on a pi/4 cone", c5},  {"tail constant plateau", c6},
      {"harmonicity of V", c7},            {"compensator drift", c8},
      {"Green function envelope", c9},     {"invariance under perturbation", c10},
      {"running maximum tightness", c11},  {"determinism", c12},
  };

  std::ofstream report;
  if (!report_path.empty()) report.open(report_path);
  auto emit = [&](const std::string& text) {
    std::cout << text << std::flush;
    if (report) report << text << std::flush;
  };

  int failed = 0, known = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      out.checks.push_back({"error", false, e.what()});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = true, only_known = true;
    std::ostringstream detail;
    for (const auto& c : out.checks) {
      if (!c.passed) {
        pass = false;
        if (!kKnownFailures.count({id, c.name})) only_known = false;
      }
      detail << "\n    " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail;
    }
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << ")";
    if (!pass && only_known) line << " [known failure]";
    line << " " << sc::format_double(std::round(secs * 10.0) / 10.0) << " s";
    if (!out.note.empty()) line << "; " << out.note;
    line << detail.str() << "\n";
    emit(line.str());
    if (!pass) (only_known ? known : failed)++;
  }
  emit("summary: " + std::to_string(failed) + " unexpected failure(s), " + std::to_string(known) +
       " known failure(s)\n");
  if (!keep) fs::remove_all(ctx.root);
  return failed == 0 ? 0 : 1;
}
