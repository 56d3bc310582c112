#include "doctest.h"

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"
#include "stablecone/experiments.hpp"

using namespace stablecone;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("stablecone-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string path_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("experiment kinds round-trip through their names") {
  for (const auto& n : kind_names()) {
    const auto k = parse_kind(n);
    REQUIRE(k.has_value());
    CHECK(kind_name(*k) == n);
  }
  CHECK_FALSE(parse_kind("nonsense").has_value());
}

TEST_CASE("defaults are filled and the canonical form round-trips") {
  for (const auto& n : kind_names()) {
    CAPTURE(n);
    const auto cfg = parse_config(R"({"experiment":")" + n + R"("})");
    const auto text = serialize_config(cfg);
    CHECK(parse_config(text) == cfg);
    CHECK(serialize_config(parse_config(text)) == text);
  }
  const auto cfg = parse_config(R"({"experiment":"survival","stable":{"alpha":0.7,"dim":3}})");
  CHECK(cfg.walk.start == Vec{0, 0, 1});
  CHECK(cfg.walk.horizons.front() == 16);
  CHECK(cfg.walk.horizons.back() == 16384);
  CHECK(cfg.compensator.epsilon == 0.3);
  CHECK(cfg.tightness.beta == doctest::Approx(0.35));
  const auto narrow = parse_config(R"({"experiment":"survival","cone":{"theta":1.0}})");
  CHECK_FALSE(narrow.tightness.beta.has_value());
}

TEST_CASE("configuration errors name the field") {
  CHECK(path_of(R"({"experiment":"survival","stable":{"alpah":1.5}})") == "stable.alpah");
  CHECK(error_of(R"({"experiment":"survival","stable":{"alpah":1.5}})").find("\"alpha\"") != std::string::npos);
  CHECK(error_of(R"({"experiment":"survival","stable":{"alpha":1.0}})").find("alpha = 1 is excluded") !=
        std::string::npos);
  CHECK(path_of(R"({"experiment":"survival","walk":{"reps":-3}})") == "walk.reps");
  CHECK(path_of(R"({"experiment":"survival","walk":{"reps":"many"}})") == "walk.reps");
  CHECK(path_of(R"({"stable":{"alpha":1.5}})") == "experiment");
  CHECK(path_of(R"({"experiment":"warp"})") == "experiment");
  CHECK(path_of(R"({"experiment":"compensator","cone":{"theta":1.0}})") == "cone.theta");
  CHECK(path_of(R"({"experiment":"survival","walk":{"start":[0,-1]}})") == "walk.start");
  const auto parse = error_of("{\"experiment\":\"survival\",\n \"stable\": {\"alpha\": 1.5,}\n}");
  CHECK(parse.find("parse error") != std::string::npos);
  CHECK(parse.find("line 2") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("integral floats are accepted for integer fields") {
  const auto cfg = parse_config(R"({"experiment":"survival","walk":{"reps":1e5}})");
  CHECK(cfg.walk.reps == 100000);
  CHECK(path_of(R"({"experiment":"survival","walk":{"reps":1.5}})") == "walk.reps");
}

TEST_CASE("perturbed law defaults to the largest admissible eps") {
  const auto cfg = parse_config(R"({"experiment":"survival","law":{"kind":"perturbed"}})");
  const auto law = make_law(cfg);
  CHECK(law.is_perturbed());
  CHECK(cfg.law.eps == doctest::Approx(IncrementLaw::max_perturbation(law.params(), 1.0, 2.0)));
}

TEST_CASE("digests and number formatting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("survival runs are reproducible across thread counts and verifiable") {
  auto cfg = parse_config(
      R"({"experiment":"survival","seed":5,"walk":{"reps":6000,"horizons":[16,32,64,128]}})");
  const auto d1 = scratch("t1"), d3 = scratch("t3");
  const auto r1 = run_experiment(cfg, d1, 1);
  const auto r3 = run_experiment(cfg, d3, 3);
  REQUIRE(r1.manifest.outputs.size() == r3.manifest.outputs.size());
  for (std::size_t i = 0; i < r1.manifest.outputs.size(); ++i) {
    CHECK(r1.manifest.outputs[i].path == r3.manifest.outputs[i].path);
    CHECK(r1.manifest.outputs[i].sha256 == r3.manifest.outputs[i].sha256);
  }
  CHECK(fs::exists(d1 / "manifest.json"));
  CHECK_FALSE(fs::exists(d1 / "manifest.json.tmp"));
  CHECK(verify_manifest(d1 / "manifest.json").empty());

  const auto m = read_manifest(d1 / "manifest.json");
  CHECK(m.kind == "survival");
  CHECK(m.config_digest == sha256_file(d1 / "config.json"));

  const auto plot = emit_plot_data(d1 / "manifest.json", "survival", d1 / "plot");
  CHECK_FALSE(plot.outputs.empty());
  CHECK(verify_manifest(d1 / "plot" / "manifest.json").empty());

  std::ofstream(d1 / "survival.csv", std::ios::app) << "tampered\n";
  const auto bad = verify_manifest(d1 / "manifest.json");
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("survival.csv") != std::string::npos);

  fs::remove(d1 / "survival.csv");
  CHECK_THROWS_WITH(emit_plot_data(d1 / "manifest.json", "survival", d1 / "plot2"),
                    doctest::Contains("survival.csv"));
  CHECK_THROWS(emit_plot_data(d3 / "manifest.json", "kappa", d3 / "plot"));
  fs::remove_all(d1);
  fs::remove_all(d3);
}

TEST_CASE("a small kernel verification passes every check") {
  const auto cfg = parse_config(R"({"experiment":"kernel-verify","seed":2,"kernel":{
      "alphas":[1.5],"dims":[2],"q":[0,0.5],"exit_samples":100000,
      "identity_samples":50000,"green_pairs":100}})");
  const auto dir = scratch("kv");
  const auto r = run_experiment(cfg, dir, 1);
  for (const auto& c : r.checks) {
    CAPTURE(c.detail);
    CHECK_MESSAGE(c.passed, c.name);
  }
  CHECK(fs::exists(dir / "poisson_normalization.csv"));
  const auto summary = nlohmann::json::parse(std::ifstream(dir / "summary.json"));
  CHECK(summary.at("kind") == "kernel-verify");
  fs::remove_all(dir);
}
