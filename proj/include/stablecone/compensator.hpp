#pragma once

// Half-space (theta = pi/2) compensator: killed Green function, the weight
// Lambda, its Green potential U, W = M + U, and the drift and supermartingale
// checks. M(x) = x_d^{alpha/2}, delta(x) = x_d.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablecone/stable.hpp"
#include "stablecone/stats.hpp"

namespace stablecone {

double default_epsilon(double alpha);

struct CompensatorConfig {
  StableParams params;
  double epsilon;
  double R = 8.0;
  double c = 0.0;
  std::int64_t mc_samples = 100000;

  // Throws std::invalid_argument unless 0 < epsilon <= alpha, R >= 0, c >= 0.
  void validate() const;
};

CompensatorConfig make_compensator_config(const StableParams& params);

struct GreenHalfspace {
  StableParams params;
  double kappa;  // Gamma(d/2) / (2^alpha pi^{d/2} Gamma(alpha/2)^2)

  // Requires d > alpha, or d = 1 (handled by the half-line form for any alpha).
  explicit GreenHalfspace(const StableParams& p);
};

// G(x,y) = kappa |x-y|^{alpha-d} int_0^zeta s^{alpha/2-1} (1+s)^{-d/2} ds,
// zeta = 4 x_d y_d / |x-y|^2; 0 when either point is not interior.
// Throws std::invalid_argument when x == y.
double green_halfspace(const GreenHalfspace& g, std::span<const double> x,
                       std::span<const double> y);

// Half-line Green function, valid for every alpha:
// Gamma(alpha/2)^{-2} |x-y|^{alpha-1} int_0^z (t(t+1))^{alpha/2-1} dt,
// z = min(x,y)/|x-y|. Integrating G over the first d-1 coordinates of y
// gives this function of (x_d, y_d).
double green_halfline(double alpha, double x, double y);

// Two-sided bound expression with beta = alpha/2:
// A |x-y|^{alpha-d} min delta(x)^{alpha/2} delta(y)^{alpha/2} |x-y|^{-d}.
double green_envelope_halfspace(const StableParams& params, std::span<const double> x,
                                std::span<const double> y);

double martin_halfspace(const StableParams& params, std::span<const double> x);
double lambda_weight(const CompensatorConfig& cfg, std::span<const double> y);
double lambda_weight_height(const CompensatorConfig& cfg, double y_d);

struct McValue {
  double value = 0.0;
  double se = 0.0;
  bool flagged = false;
};

// Importance sampling of U(x) = int G(x,y) Lambda(y) dy around x: a near
// component |y-x| = delta U^{1/alpha} and a Pareto far component
// |y-x| = delta U^{-2/eps}, split by a pilot-tuned fraction. Flagged when
// se exceeds rel_tol * value.
McValue u_lambda_mc(const CompensatorConfig& cfg, const GreenHalfspace& g,
                    std::span<const double> x, RngStream& stream, double rel_tol = 0.05);

// U as a function of the height: int_0^inf G1(x_d, s) Lambda(s) ds.
QuadResult u_lambda_quadrature(const CompensatorConfig& cfg, double height);

// U on a log-spaced height grid with a cubic spline in (log h, log U) and
// power-law extrapolation outside.
class UProfile {
 public:
  UProfile(const CompensatorConfig& cfg, double h_min = 1e-3, double h_max = 1e5,
           int points_per_decade = 12);
  double operator()(double height) const;

 private:
  struct Spline;
  double log_lo_, log_hi_, step_;
  std::vector<double> log_u_;
  std::shared_ptr<const Spline> spline_;
  double slope_lo_, slope_hi_;
};

// f(y) = E M(y + X) - M(y) for the exact stable law, by quadrature of the
// one-dimensional marginal.
QuadResult error_function_quadrature(const StableParams& params, double height);

struct DriftResult {
  std::vector<double> y;  // x + R e_d
  double delta = 0.0;
  double drift = 0.0;
  double se = 0.0;
  double lambda = 0.0;
  double m_value = 0.0;
  double u_value = 0.0;
  bool flagged = false;
};

// E[W(y + X)] - W(y), y = x + R e_d, from mc_samples antithetic pairs
// (X, -X). U comes from the profile.
DriftResult error_drift_check(const CompensatorConfig& cfg, const IncrementLaw& law,
                              const UProfile& u, std::span<const double> x,
                              std::uint64_t seed, int threads = 1);

// Error function by Monte Carlo (antithetic pairs).
McValue error_function_mc(const StableParams& params, const IncrementLaw& law,
                          std::span<const double> y, std::int64_t samples, std::uint64_t seed,
                          int threads = 1);

struct TraceCell {
  int delta_bin = 0;  // floor(log2 delta)
  int norm_bin = 0;   // floor(log2 |x|)
  std::int64_t count = 0;
  double mean = 0.0;
  double se = 0.0;
  bool exceeds = false;       // mean above +2 se
  bool undersampled = false;  // count below min_count
};

struct LoggedPath {
  std::vector<double> y;         // Y_n for n = 0..n_steps
  std::vector<bool> alive;       // tau > n
  std::vector<double> lambda_sum;  // sum_{k<n} Lambda(x + R e_d + S(k)) 1{tau > k}
};

struct SupermartingaleTrace {
  std::vector<TraceCell> cells;
  std::vector<LoggedPath> logged;
  std::int64_t exceeding_cells = 0;
  std::int64_t undersampled_cells = 0;
};

struct TraceOptions {
  std::int64_t n_steps = 16;
  std::int64_t reps = 100000;
  std::int64_t min_count = 200;
  int logged_paths = 10;
  bool m_only = false;  // W = M
};

// Y_n = W(x + R e_d + S(n)) 1{tau_x > n} + c sum_{k<n} Lambda(...) 1{tau_x > k}.
// Each realised one-step increment from an alive state is an unbiased draw of
// the conditional increment; increments are binned by the (delta, |x|) cell
// of the walk state x + S(k).
SupermartingaleTrace supermartingale_trace(const CompensatorConfig& cfg, const IncrementLaw& law,
                                           const UProfile& u, std::span<const double> x,
                                           const TraceOptions& opt, std::uint64_t seed,
                                           int threads = 1);

}  // namespace stablecone
