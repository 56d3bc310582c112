#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stablecone {

inline constexpr double kZ95 = 1.959963984540054;

// Sufficient statistics for a sample mean; merging is exact integer/float
// addition, so a fixed merge order gives bit-identical results.
struct Moments {
  std::int64_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
  double se() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ95);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  std::vector<double> residuals;
};

// Weighted least squares with weights 1/diag(cov); the slope variance is
// c' cov c for the linear map y -> slope, so correlated errors are honoured.
// cov is row-major n x n; pass an empty span for independent unit errors.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> cov);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov. Both empirical CDFs are evaluated after all
// observations equal to a value are absorbed, so ties never create a jump
// that only one sample sees. Asymptotic p-value with Stephens' correction.
// Throws std::invalid_argument for samples smaller than kKsMinSize.
inline constexpr std::size_t kKsMinSize = 50;
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// One-sample KS distance sup |F_n - F| against a continuous CDF.
KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

// Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

double chi_square_sf(double x, double dof);

// Empirical quantile with linear interpolation (type 7).
double quantile(std::vector<double> values, double p);

}  // namespace stablecone
