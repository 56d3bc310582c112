// stablecone: run experiments from JSON configs and emit plot data.
//
// exit status: 0 ok, 1 a configured check failed (with --assert or
// "assert": true), 2 bad usage or config, 3 runtime failure.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stablecone/experiments.hpp"

namespace sc = stablecone;

namespace {

void report_error(const std::string& kind, const std::string& message, const std::string& path = "") {
  nlohmann::ordered_json j = {{"error", kind}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  std::cerr << j.dump() << "\n";
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv(std::string(sc::kOutDirEnv).c_str()); env && *env) return env;
  return "stablecone-out";
}

struct RunOptions {
  std::string config;
  std::string out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool assert_mode = false;
};

int run(sc::ExperimentKind kind, const RunOptions& opt) {
  sc::ExperimentConfig cfg;
  try {
    cfg = sc::load_config(opt.config);
    if (cfg.experiment != kind) {
      throw sc::ConfigError("experiment", "config is a \"" + std::string(sc::kind_name(cfg.experiment)) +
                                              "\" experiment, not \"" +
                                              std::string(sc::kind_name(kind)) + "\"");
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.assert_mode) cfg.assert_checks = true;
  } catch (const sc::ConfigError& e) {
    report_error("config", e.what(), e.path());
    return 2;
  }
  const auto out = opt.out_dir.empty() ? default_out_dir() : std::filesystem::path(opt.out_dir);
  sc::RunResult res;
  try {
    res = sc::run_experiment(cfg, out, opt.threads);
  } catch (const std::exception& e) {
    report_error("runtime", e.what());
    return 3;
  }
  for (const auto& c : res.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  for (const auto& f : res.flags) std::cout << "FLAG " << f << "\n";
  std::cout << "manifest: " << (out / "manifest.json").string() << "\n";
  if (cfg.assert_checks && !res.all_passed()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in cones with stable increments: experiment driver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sc::kToolVersion));

  std::vector<std::pair<CLI::App*, sc::ExperimentKind>> subs;
  std::vector<RunOptions> opts(sc::kind_names().size());
  std::vector<std::uint64_t> seeds(opts.size());
  int i = 0;
  for (const auto& name : sc::kind_names()) {
    auto& o = opts[static_cast<std::size_t>(i)];
    auto* sub = app.add_subcommand(name, "Run a " + name + " experiment");
    sub->add_option("--config", o.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o.out_dir,
                    "Output directory (default $" + std::string(sc::kOutDirEnv) + " or ./stablecone-out)");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seeds[static_cast<std::size_t>(i)], "Override the master seed");
    sub->add_flag("--assert", o.assert_mode, "Exit 1 when any check fails");
    subs.emplace_back(sub, *sc::parse_kind(name));
    ++i;
  }

  std::string manifest, which = "survival", plot_out;
  auto* plot = app.add_subcommand("plot", "Emit plot-ready CSVs from a finished run");
  plot->add_option("--manifest", manifest, "manifest.json of the upstream run")->required();
  plot->add_option("--which", which, "survival, kappa or tightness")
      ->check(CLI::IsMember({"survival", "kappa", "tightness"}));
  plot->add_option("--out-dir", plot_out, "Output directory (default <run>/plot-<which>)");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Recompute the digests listed in a manifest");
  verify->add_option("manifest", verify_path, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k].first->parsed()) {
      if (subs[k].first->count("--seed") > 0) opts[k].seed = seeds[k];
      return run(subs[k].second, opts[k]);
    }
  }
  try {
    if (plot->parsed()) {
      const std::filesystem::path mp(manifest);
      const auto out = plot_out.empty() ? mp.parent_path() / ("plot-" + which) : std::filesystem::path(plot_out);
      const auto m = sc::emit_plot_data(mp, which, out);
      for (const auto& o : m.outputs) std::cout << (out / o.path).string() << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const auto bad = sc::verify_manifest(verify_path);
      for (const auto& b : bad) std::cout << "MISMATCH " << b << "\n";
      if (bad.empty()) std::cout << "all digests verify\n";
      return bad.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    report_error("runtime", e.what());
    return 3;
  }
  return 2;
}
