#pragma once

// Martin kernel of the cone: closed form in the half-space, survival-ratio
// estimates elsewhere, the index beta, and the mean-value and envelope checks.
// Normalisation is M(e_d) = 1 throughout.

#include <cstdint>
#include <span>
#include <vector>

#include "stablecone/cone.hpp"
#include "stablecone/stable.hpp"
#include "stablecone/walk.hpp"

namespace stablecone {

// x_d^{alpha/2} for x_d > 0 and 0 elsewhere, so it can be fed to exit laws
// that leave the half-space.
double eval_martin_halfspace(const StableParams& params, std::span<const double> x);

struct BetaEstimate {
  double beta_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  bool widened = false;  // under 100 survivors at the top horizon: CI doubled
  std::vector<std::int64_t> fit_horizons;
  std::vector<double> residuals;
  double trend_p_value = 1.0;  // residual-vs-log n trend over the top decade
};

inline constexpr double kBetaDropFraction = 0.2;
inline constexpr std::int64_t kBetaMinTopSurvivors = 100;

// Weighted least squares of log P-hat on log n, dropping the smallest 20% of
// horizons. The covariance of the shared-path log survival estimates enters
// the slope variance.
BetaEstimate beta_from_survival(const SurvivalTable& survival, double alpha);

// Needs >= 5 geometric horizons and reps >= 1e5; runs from e_d.
BetaEstimate estimate_beta(const ConeSpec& cone, const IncrementLaw& law,
                           std::span<const std::int64_t> horizons, std::int64_t reps,
                           std::uint64_t seed, int threads = 1);

struct RatioPoint {
  std::int64_t n;
  double ratio;
  double se;
};

struct RatioEstimate {
  double value = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool non_plateau = false;  // top two horizons disagree beyond their joint CI
  std::vector<RatioPoint> series;
};

// Ratio of survival from start s to survival from start 0 of a coupled run,
// with the delta-method SE using the joint survival counts.
RatioEstimate ratio_from_coupled(const CoupledSurvival& run, std::size_t s);

// M(x) / M(e_d) as P(tau_{Lx} > n) / P(tau_{L e_d} > n) on common random
// numbers, L = start_scale. Lifting both starts by L leaves the kernel ratio
// unchanged by homogeneity and moves the walk's harmonic function closer to M.
struct RatioRun {
  RatioEstimate ratio;
  CoupledSurvival survival;
};
RatioRun estimate_martin_ratio(const ConeSpec& cone, const IncrementLaw& law,
                               std::span<const double> x, std::span<const std::int64_t> horizons,
                               std::int64_t reps, std::uint64_t seed, int threads = 1,
                               double start_scale = 1.0);

inline constexpr int kProfileAngles = 32;

struct MartinEstimate {
  ConeSpec cone;
  StableParams params;
  BetaEstimate beta;
  std::vector<double> angles;  // uniform on [0, theta), kProfileAngles points
  std::vector<double> values;  // M-hat(unit vector at angle), values[0] = 1
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<bool> non_plateau;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  double start_scale = 1.0;

  // |x|^beta times the profile interpolated linearly in angle, with value 0
  // at the boundary angle; 0 off the cone.
  double eval(std::span<const double> x) const;
};

MartinEstimate estimate_martin_profile(const ConeSpec& cone, const IncrementLaw& law,
                                       std::span<const std::int64_t> horizons, std::int64_t reps,
                                       std::uint64_t seed, int threads = 1,
                                       double start_scale = 1.0,
                                       int n_angles = kProfileAngles);

struct MeanValueResidual {
  double residual = 0.0;
  double se = 0.0;
  double m_at_x = 0.0;
};

// E[M_eval(exit of Z from B_r(x))] - M_eval(x). M_eval must be defined on all
// of R^d. Throws std::invalid_argument unless r < delta(x).
MeanValueResidual check_mean_value(const ConeSpec& cone, const StableParams& params,
                                   const PointFunction& m_eval, std::span<const double> x,
                                   double r, std::int64_t reps, std::uint64_t seed,
                                   int threads = 1);

struct EnvelopeStats {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

// M(x) / (|x|^{beta - alpha/2} delta(x)^{alpha/2}) over the grid.
EnvelopeStats check_michalik_envelope(const ConeSpec& cone, const StableParams& params,
                                      const PointFunction& m_eval, double beta,
                                      const std::vector<Vec>& grid);
EnvelopeStats check_michalik_envelope(const MartinEstimate& estimate, const std::vector<Vec>& grid);

}  // namespace stablecone
