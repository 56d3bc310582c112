#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "stablecone/meander.hpp"

using namespace stablecone;

namespace {

WalkConfig half_plane(double alpha, std::int64_t n, std::int64_t budget, std::uint64_t seed) {
  return {ConeSpec(2, std::numbers::pi / 2), IncrementLaw::exact(StableParams(alpha, 2)),
          {0.0, 1.0}, n, budget, seed};
}

}  // namespace

TEST_CASE("conditioned sample is thread-independent and stays in the cone") {
  const auto cfg = half_plane(1.5, 64, 200000, 3);
  const auto a = sample_conditioned(cfg, 64, 8, 300, 1);
  const auto b = sample_conditioned(cfg, 64, 8, 300, 3);
  CHECK(a.accepted == 300);
  CHECK_FALSE(a.partial);
  CHECK(a.path_index == b.path_index);
  CHECK(a.skeleton == b.skeleton);
  CHECK(a.proposed == a.path_index.back() + 1);
  for (std::size_t i = 1; i < a.path_index.size(); ++i) CHECK(a.path_index[i] > a.path_index[i - 1]);
  const double scale = std::pow(64.0, -1.0 / 1.5);
  CHECK(a.point(0, 0)[1] == doctest::Approx(scale));
  for (std::int64_t i = 0; i < a.accepted; ++i) {
    for (int j = 0; j <= a.k; ++j) CHECK(a.point(i, j)[1] > 0.0);
    CHECK(a.max_modulus[static_cast<std::size_t>(i)] >= std::hypot(a.point(i, a.k)[0], a.point(i, a.k)[1]) * (1 - 1e-12));
  }
  CHECK(a.acceptance_rate() > 0.0);
}

TEST_CASE("budget exhaustion marks the sample partial") {
  const auto cfg = half_plane(1.5, 64, 500, 3);
  const auto s = sample_conditioned(cfg, 64, 4, 1000);
  CHECK(s.partial);
  CHECK(s.proposed == 500);
  CHECK_THROWS_AS(sample_conditioned(cfg, 64, 4, 50), std::invalid_argument);
  CHECK_THROWS_AS(sample_conditioned(cfg, 128, 4, 200), std::invalid_argument);
}

TEST_CASE("endpoint statistics") {
  const auto cfg = half_plane(1.5, 32, 200000, 5);
  const auto s = sample_conditioned(cfg, 32, 4, 400);
  const auto st = endpoint_stats(s, std::numbers::pi / 2, 6, 100, 1);
  std::int64_t total = 0;
  for (auto c : st.angle_counts) total += c;
  CHECK(total == 400);
  for (std::size_t i = 1; i < st.probs.size(); ++i) {
    CHECK(st.radius_quantiles[i] >= st.radius_quantiles[i - 1]);
  }
  CHECK(st.radius_median_lo <= st.radius_median);
  CHECK(st.radius_median_hi >= st.radius_median);
}

TEST_CASE("two independent samples of one law pass the invariance comparison") {
  auto a = half_plane(1.5, 64, 400000, 7);
  auto b = a;
  b.seed = 8;
  const auto r = invariance_check(a, b, 64, 600);
  CHECK(r.pass);
  CHECK(r.radius.p_value > 0.005);
  auto c = a;
  c.cone = ConeSpec(2, 1.0);
  CHECK_THROWS_AS(invariance_check(a, c, 64, 600), std::invalid_argument);
}

TEST_CASE("tightness fit recovers a Pareto tail") {
  MeanderSample s;
  s.alpha = 1.5;
  s.dim = 2;
  s.accepted = 200000;
  RngStream rng(11, "pareto", 0);
  for (std::int64_t i = 0; i < s.accepted; ++i) s.max_modulus.push_back(std::pow(rng.uniform(), -1.0 / 0.75));
  const auto grid = default_tightness_grid();
  const auto t = tightness_check(s, grid, 0.75);
  CHECK(t.target_slope == doctest::Approx(-0.75));
  CHECK(std::abs(t.slope + 0.75) < 4.0 * t.slope_se + 0.01);
  for (const auto& row : t.rows) CHECK(row.p <= row.bound + 1e-12);
  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(tightness_check(s, bad, 0.75), std::invalid_argument);
}
