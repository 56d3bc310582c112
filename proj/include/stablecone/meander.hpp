#pragma once

// Walks conditioned on tau_x > n by rejection, scaled by n^{1/alpha}, and the
// statistics behind the invariance and tightness checks.

#include <cstdint>
#include <span>
#include <vector>

#include "stablecone/stats.hpp"
#include "stablecone/walk.hpp"

namespace stablecone {

inline constexpr int kSkeletonPoints = 16;
inline constexpr std::int64_t kMinAccepted = 100;

struct MeanderSample {
  std::int64_t n = 0;
  int k = kSkeletonPoints;
  int dim = 0;
  double alpha = 0.0;
  std::vector<double> times;              // j / k, j = 0..k
  std::vector<std::int64_t> path_index;   // accepted paths, increasing
  std::vector<double> skeleton;           // accepted x (k+1) x dim, scaled
  std::vector<double> max_modulus;        // max_{j<=n} |x + S(j)| / n^{1/alpha}
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  bool partial = false;  // proposal budget ran out before the target

  std::span<const double> point(std::int64_t path, int j) const;
  double acceptance_rate() const;
};

// Proposals run in path-index order in rounds; the sample keeps the first
// target_accepted survivors, so it does not depend on the thread count.
// cfg.reps is the proposal budget. Throws unless n <= cfg.horizon and
// target_accepted >= 100.
MeanderSample sample_conditioned(const WalkConfig& cfg, std::int64_t n, int k,
                                 std::int64_t target_accepted, int threads = 1);

struct EndpointStats {
  std::vector<double> probs;             // quantile levels
  std::vector<double> radius_quantiles;  // |endpoint|
  std::vector<double> last_coord_quantiles;
  std::vector<double> max_modulus_quantiles;
  std::vector<double> angle_edges;       // histogram of the endpoint axis angle
  std::vector<std::int64_t> angle_counts;
  double radius_median = 0.0;
  double radius_median_lo = 0.0;  // bootstrap 95% interval
  double radius_median_hi = 0.0;
};

EndpointStats endpoint_stats(const MeanderSample& s, double theta, int angle_bins = 8,
                             int bootstrap = 500, std::uint64_t seed = 0);

std::vector<double> endpoint_radii(const MeanderSample& s);
std::vector<double> endpoint_last_coord(const MeanderSample& s);

struct InvarianceResult {
  KsResult radius;
  KsResult last_coord;
  KsResult max_modulus;  // reported, not part of the verdict
  double p_floor = 0.01;
  bool pass = false;     // both projections above p_floor / 2
  bool partial = false;
  MeanderSample a;
  MeanderSample b;
};

// KS on the scaled endpoint radius and last coordinate, Bonferroni over the
// two. Each sample is scaled by its own alpha.
InvarianceResult invariance_check(const WalkConfig& cfg_a, const WalkConfig& cfg_b, std::int64_t n,
                                  std::int64_t target, int threads = 1);
InvarianceResult compare_meanders(MeanderSample a, MeanderSample b);

struct TightnessRow {
  double A;
  std::int64_t exceed;
  double p;
  double bound;  // C / A^{alpha - beta}, C the smallest constant over the grid
  bool flagged;  // fewer than kMinExceedances
};

inline constexpr std::int64_t kMinExceedances = 10;

struct TightnessResult {
  std::vector<TightnessRow> rows;
  double slope = 0.0;
  double slope_se = 0.0;
  double target_slope = 0.0;  // -(alpha - beta)
  double constant = 0.0;
};

// P(max_j |x + S(j)| > A n^{1/alpha} | tau > n) on the grid and the log-log
// slope over rows with A in [fit_lo, fit_hi] and enough exceedances.
TightnessResult tightness_check(const MeanderSample& s, std::span<const double> a_grid,
                                double beta_hat, double fit_lo = 2.0, double fit_hi = 16.0);

std::vector<double> default_tightness_grid();

}  // namespace stablecone
