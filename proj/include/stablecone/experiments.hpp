#pragma once

// Experiment driver: JSON configuration, dispatch to the numerical modules,
// CSV/JSON outputs and a run manifest with content digests.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stablecone/stable.hpp"

namespace stablecone {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kOutDirEnv = "STABLECONE_OUT_DIR";

enum class ExperimentKind {
  survival,
  beta,
  martin_profile,
  v_estimate,
  kappa,
  compensator,
  meander_invariance,
  tightness,
  kernel_verify,
};

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
std::vector<std::string> kind_names();

// Invalid configuration; path is the dotted field path ("walk.reps"), or
// empty for parse errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct StableBlock {
  double alpha = 1.5;
  int dim = 2;
  bool operator==(const StableBlock&) const = default;
};

struct ConeBlock {
  double theta = 1.5707963267948966;
  bool operator==(const ConeBlock&) const = default;
};

struct LawBlock {
  std::string kind = "exact";  // or "perturbed"
  double eps = 0.0;            // perturbed default: IncrementLaw::max_perturbation
  double r1 = 1.0;
  double r2 = 1.0;
  double r3 = 2.0;
  bool operator==(const LawBlock&) const = default;
};

struct WalkBlock {
  Vec start;                            // default e_d
  std::int64_t reps = 100000;
  std::vector<std::int64_t> horizons;   // default 2^4 .. 2^14
  bool operator==(const WalkBlock&) const = default;
};

struct MartinBlock {
  double start_scale = 16.0;
  int angles = 32;  // 0 skips the profile
  Vec x;            // homogeneity point, default 2 e_d
  std::int64_t reps = 100000;
  std::vector<std::int64_t> horizons;  // default 2^4 .. 2^12
  bool operator==(const MartinBlock&) const = default;
};

struct VBlock {
  std::vector<std::int64_t> m_grid;  // default 0, 1, 4, ..., 4^7
  bool operator==(const VBlock&) const = default;
};

struct HarmonicBlock {
  bool enabled = true;
  Vec x;  // default 2 e_d
  std::int64_t m_star = 64;
  std::int64_t inner_reps = 8;
  std::int64_t outer_reps = 20000;
  std::int64_t reps = 200000;
  bool operator==(const HarmonicBlock&) const = default;
};

struct KappaBlock {
  std::vector<Vec> starts;     // default e_d, 2 e_d
  std::optional<double> beta;  // default: fitted from the first start
  bool operator==(const KappaBlock&) const = default;
};

struct CompensatorBlock {
  double epsilon = 0.0;  // default 0.5 for alpha > 1, 0.3 otherwise
  double R = 8.0;
  std::optional<double> c;  // default: half the smallest drift margin
  std::int64_t mc_samples = 2000000;
  std::vector<double> ladder{4.0, 8.0, 16.0, 32.0};
  std::int64_t trace_reps = 20000;
  std::int64_t trace_steps = 16;
  bool operator==(const CompensatorBlock&) const = default;
};

struct MeanderBlock {
  std::int64_t n = 4096;
  std::int64_t target = 2000;
  int k = 16;
  std::optional<double> control_alpha = 0.7;
  bool operator==(const MeanderBlock&) const = default;
};

struct TightnessBlock {
  std::vector<double> a_grid;  // default 2^{i/2}, i = -2..10
  double fit_lo = 2.0;
  double fit_hi = 16.0;
  std::optional<double> beta;  // default alpha/2 on the half-space
  bool operator==(const TightnessBlock&) const = default;
};

struct KernelBlock {
  std::vector<double> alphas{0.7, 1.5};
  std::vector<int> dims{1, 2, 3};
  std::vector<double> q{0.0, 0.5, 0.9};
  std::int64_t exit_samples = 100000;
  std::int64_t identity_samples = 1000000;
  std::int64_t green_pairs = 1000;
  bool operator==(const KernelBlock&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::survival;
  std::string name;
  std::uint64_t seed = 0;
  StableBlock stable;
  ConeBlock cone;
  LawBlock law;
  WalkBlock walk;
  MartinBlock martin;
  VBlock v;
  HarmonicBlock harmonic;
  KappaBlock kappa;
  CompensatorBlock compensator;
  MeanderBlock meander;
  TightnessBlock tightness;
  KernelBlock kernel;
  bool assert_checks = false;  // "assert" in JSON

  bool operator==(const ExperimentConfig&) const = default;
};

// Parse, fill defaults and validate. Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical JSON with every field present; parse_config inverts it.
std::string serialize_config(const ExperimentConfig& cfg);

// Re-run the checks after a programmatic change (e.g. a seed override).
void validate_config(const ExperimentConfig& cfg);

IncrementLaw make_law(const ExperimentConfig& cfg);

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string experiment;
  std::string kind;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string stream_scheme;
  std::string started;
  std::string finished;
  std::vector<OutputFile> outputs;
  std::string tool_version;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  RunManifest manifest;
  std::vector<CheckResult> checks;
  std::vector<std::string> flags;  // module diagnostics, not assertions
  bool all_passed() const;
};

// Writes the outputs, summary.json and finally manifest.json (temp file and
// rename) into out_dir.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         int threads = 1);

RunManifest read_manifest(const std::filesystem::path& manifest_path);

// Recompute every digest; returns the outputs that are missing or differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

// which: "survival", "kappa" or "tightness". Reads the run next to the
// manifest and writes plot CSVs (x, y, ci_lo, ci_hi) and reference_slopes.txt
// into out_dir with their own manifest. Throws std::runtime_error naming
// missing upstream outputs.
RunManifest emit_plot_data(const std::filesystem::path& manifest_path, std::string_view which,
                           const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace stablecone
