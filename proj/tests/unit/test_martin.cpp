#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "stablecone/martin.hpp"

using namespace stablecone;

namespace {
const double kHalf = std::numbers::pi / 2;
}

TEST_CASE("half-space kernel") {
  const StableParams p(1.5, 2);
  const std::vector<double> a{3.0, 4.0}, b{1.0, -1.0}, e{0.0, 1.0};
  CHECK(eval_martin_halfspace(p, a) == doctest::Approx(std::pow(4.0, 0.75)));
  CHECK(eval_martin_halfspace(p, b) == 0.0);
  CHECK(eval_martin_halfspace(p, e) == 1.0);
}

TEST_CASE("beta from an exact power law") {
  SurvivalTable t;
  t.reps = 1000000;
  for (int k = 4; k <= 14; ++k) {
    const std::int64_t n = std::int64_t{1} << k;
    t.horizons.push_back(n);
    t.survivors.push_back(std::llround(1e6 * std::pow(static_cast<double>(n), -0.4)));
    t.estimate.push_back(static_cast<double>(t.survivors.back()) / 1e6);
    t.ci_lo.push_back(0.0);
    t.ci_hi.push_back(1.0);
    t.degenerate.push_back(false);
  }
  const auto b = beta_from_survival(t, 1.5);
  CHECK(b.beta_hat == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(b.fit_horizons.size() == t.horizons.size() - 2);
  CHECK(b.ci_lo < b.beta_hat);
  CHECK(b.ci_hi > b.beta_hat);
}

TEST_CASE("estimated half-space index is near alpha/2") {
  const StableParams p(1.5, 2);
  const auto h = geometric_horizons(4, 10);
  const auto b = estimate_beta(ConeSpec(2, kHalf), IncrementLaw::exact(p), h, 100000, 19);
  CHECK(std::abs(b.beta_hat - 0.75) < 0.1);
  const auto few = geometric_horizons(4, 7);
  CHECK_THROWS_AS(estimate_beta(ConeSpec(2, kHalf), IncrementLaw::exact(p), few, 100000, 19),
                  std::invalid_argument);
}

TEST_CASE("tangential shifts leave half-space survival unchanged path by path") {
  const StableParams p(1.5, 2);
  const std::vector<double> x{1.0, 1.0};
  const auto h = geometric_horizons(4, 8);
  const auto r = estimate_martin_ratio(ConeSpec(2, kHalf), IncrementLaw::exact(p), x, h, 5000, 3, 1, 4.0);
  CHECK(r.ratio.value == doctest::Approx(1.0));
  CHECK(r.ratio.se == doctest::Approx(0.0));
}

TEST_CASE("ratio estimate approaches the kernel ratio") {
  const StableParams p(1.5, 2);
  const std::vector<double> x{0.0, 2.0};
  const auto h = geometric_horizons(4, 11);
  const auto r = estimate_martin_ratio(ConeSpec(2, kHalf), IncrementLaw::exact(p), x, h, 40000, 5, 1, 16.0);
  CHECK(r.ratio.value == doctest::Approx(std::pow(2.0, 0.75)).epsilon(0.08));
}

TEST_CASE("mean-value property of the half-space kernel") {
  const StableParams p(1.5, 2);
  const PointFunction m = [&](std::span<const double> y) { return eval_martin_halfspace(p, y); };
  const std::vector<double> x{0.5, 2.0};
  const auto r = check_mean_value(ConeSpec(2, kHalf), p, m, x, 1.5, 100000, 7);
  CHECK(std::abs(r.residual) < 4.0 * r.se);
  CHECK(r.m_at_x == doctest::Approx(std::pow(2.0, 0.75)));
  CHECK_THROWS_AS(check_mean_value(ConeSpec(2, kHalf), p, m, x, 2.5, 10, 7), std::invalid_argument);
}

TEST_CASE("envelope ratio of the exact half-space kernel is one") {
  const StableParams p(0.7, 3);
  const ConeSpec cone(3, kHalf);
  const PointFunction m = [&](std::span<const double> y) { return eval_martin_halfspace(p, y); };
  const std::vector<double> radii{0.5, 1, 10}, angles{0.0, 0.7, 1.4};
  const auto grid = sample_interior_grid(cone, radii, angles);
  const auto e = check_michalik_envelope(cone, p, m, 0.35, grid);
  CHECK(e.min_ratio == doctest::Approx(1.0));
  CHECK(e.max_ratio == doctest::Approx(1.0));
}

TEST_CASE("profile estimate is normalised at the axis and vanishes off the cone") {
  const StableParams p(1.5, 2);
  const ConeSpec cone(2, std::numbers::pi / 4);
  const auto h = geometric_horizons(3, 8);
  const auto est = estimate_martin_profile(cone, IncrementLaw::exact(p), h, 4000, 9, 1, 4.0, 4);
  REQUIRE(est.values.size() == 4);
  CHECK(est.values[0] == 1.0);
  const std::vector<double> axis{0.0, 1.0}, outside{1.0, 0.0};
  CHECK(est.eval(axis) == doctest::Approx(1.0));
  CHECK(est.eval(outside) == 0.0);
  for (double v : est.values) CHECK(v > 0.0);
}
