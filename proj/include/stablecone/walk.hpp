#pragma once

// Random walk x + S(n) with i.i.d. increments, killed on leaving the cone.
// Path i of a configuration always draws from the substream
// (seed, "walk", i), so every estimator that shares a seed shares paths.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stablecone/cone.hpp"
#include "stablecone/rng.hpp"
#include "stablecone/stable.hpp"
#include "stablecone/stats.hpp"

namespace stablecone {

inline constexpr std::string_view kWalkTag = "walk";

struct WalkConfig {
  ConeSpec cone;
  IncrementLaw law;
  Vec start;
  std::int64_t horizon = 1;
  std::int64_t reps = 1;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument on dimension mismatch, start outside the cone,
// horizon < 1 or reps < 1.
void validate(const WalkConfig& cfg);

using PointFunction = std::function<double(std::span<const double>)>;

struct ExitRecord {
  std::int64_t path_index = 0;
  std::int64_t tau = 0;     // first exit step, or horizon + 1 when censored
  bool censored = false;
  Vec final_position;       // exit point, or the position at the horizon
  double running_max = 0.0; // max |x + S(k)| over alive k <= min(tau - 1, horizon)
};

namespace detail {

// Advances pos by one increment per step and calls on_step(k, pos) while the
// walk is alive. Returns the exit step, or horizon + 1.
template <class OnStep>
std::int64_t walk_path(const ConeSpec& cone, const IncrementLaw& law, std::span<double> pos,
                       RngStream& rng, std::int64_t horizon, OnStep&& on_step) {
  const int d = law.dim();
  std::array<double, kMaxDim> inc{};
  const std::span<double> step(inc.data(), static_cast<std::size_t>(d));
  for (std::int64_t k = 1; k <= horizon; ++k) {
    law.sample(rng, step);
    for (int i = 0; i < d; ++i) pos[i] += step[i];
    if (!contains(cone, pos)) return k;
    on_step(k, std::span<const double>(pos.data(), pos.size()));
  }
  return horizon + 1;
}

}  // namespace detail

ExitRecord run_walk_exit(const WalkConfig& cfg, std::int64_t path_index);
ExitRecord run_walk_exit(const WalkConfig& cfg, std::int64_t path_index, RngStream& stream);

struct SurvivalTable {
  std::vector<std::int64_t> horizons;
  std::vector<std::int64_t> survivors;
  std::int64_t reps = 0;
  std::vector<double> estimate;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<bool> degenerate;  // no survivors: the interval is [0, hi]

  // Covariance of log P-hat across horizons under shared paths:
  // cov(log P_i, log P_j) = (1 - P_i) / (reps P_i) for n_i <= n_j.
  std::vector<double> log_covariance(std::span<const std::size_t> rows) const;
};

// Sorted, unique, within [1, cfg.horizon]; throws std::invalid_argument otherwise.
void check_horizons(std::span<const std::int64_t> horizons, std::int64_t max_horizon);

// Geometric grid base^k for k in [lo, hi].
std::vector<std::int64_t> geometric_horizons(int lo_exp, int hi_exp, std::int64_t base = 2);

SurvivalTable survival_curve(const WalkConfig& cfg, std::span<const std::int64_t> horizons,
                             int threads = 1);

// Several starts driven by one increment sequence per path (common random
// numbers). joint[s][h] counts paths on which start 0 and start s both
// survive horizon h.
struct CoupledSurvival {
  std::vector<Vec> starts;
  std::vector<SurvivalTable> tables;
  std::vector<std::vector<std::int64_t>> joint;
};

CoupledSurvival coupled_survival(const ConeSpec& cone, const IncrementLaw& law,
                                 const std::vector<Vec>& starts,
                                 std::span<const std::int64_t> horizons, std::int64_t reps,
                                 std::uint64_t seed, int threads = 1);

struct HarmonicEstimate {
  Vec x;
  std::vector<std::int64_t> m_grid;
  std::vector<double> v_hat;
  std::vector<double> se;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  // Per-path differences between consecutive grid points (same paths).
  std::vector<double> step_diff;
  std::vector<double> step_diff_se;
  bool plateau = false;  // last step difference within 1.96 of its SE
};

struct SurvivalAndHarmonic {
  SurvivalTable survival;
  HarmonicEstimate harmonic;
};

// V_m(x) = E[M(x + S(m)); tau > m] on the shared paths; V_0 = M(x).
HarmonicEstimate estimate_V(const WalkConfig& cfg, std::span<const std::int64_t> m_grid,
                            const PointFunction& m_eval, int threads = 1);

// One pass producing both tables from the same paths.
SurvivalAndHarmonic survival_and_V(const WalkConfig& cfg, std::span<const std::int64_t> horizons,
                                   std::span<const std::int64_t> m_grid,
                                   const PointFunction& m_eval, int threads = 1);

// One-step kernel for harmonicity_residual: the walk step, or the exit
// position of Z from B_r(x) (the exact mean-value oracle).
struct BallExitKernel {
  double radius;
};

struct HarmonicityResidual {
  double residual = 0.0;
  double se = 0.0;
  double v_hat = 0.0;
  double v_se = 0.0;
  double successor_mean = 0.0;
  double successor_se = 0.0;
  double inner_variance_share = 0.0;
  bool flagged = false;  // inner-estimate noise dominates the outer spread
};

// V(x) - E[V(x + X); tau_x > 1] by nested Monte Carlo: V at x from cfg.reps
// fresh paths; outer_reps successors, each scored by V_{m_star} with
// inner_reps inner paths.
HarmonicityResidual harmonicity_residual(const WalkConfig& cfg, std::span<const double> x,
                                         std::int64_t m_star, std::int64_t inner_reps,
                                         std::int64_t outer_reps, const PointFunction& m_eval,
                                         int threads = 1,
                                         std::optional<BallExitKernel> kernel = std::nullopt);

struct KappaPoint {
  std::int64_t n;
  double kappa;
  double lo;
  double hi;
};

struct KappaEstimate {
  std::vector<KappaPoint> series;
  double plateau = 0.0;     // mean over the top decade
  double plateau_se = 0.0;
  double max_rel_drift = 0.0;  // (max - min) / mean over the top decade
  bool non_plateau = false;    // drift above 10%
};

inline constexpr double kKappaDriftLimit = 0.10;

// kappa(n) = n^{beta/alpha} P(tau_x > n) / V(x). Intervals carry the survival
// and V uncertainty; beta enters as a fixed exponent.
KappaEstimate estimate_kappa(const SurvivalTable& survival, double v_hat, double v_se,
                             double beta_hat, double alpha);

// sup_n n^{beta/alpha} P(tau_x > n) / w_value (the upper-bound statistic).
double survival_upper_bound_statistic(const SurvivalTable& survival, double beta_hat,
                                      double alpha, double w_value);

}  // namespace stablecone
