#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "oracle_values.hpp"
#include "stablecone/martin.hpp"
#include "stablecone/walk.hpp"

using namespace stablecone;

namespace {

WalkConfig half_plane(double alpha, std::int64_t horizon, std::int64_t reps, std::uint64_t seed) {
  const StableParams p(alpha, 2);
  return {ConeSpec(2, std::numbers::pi / 2), IncrementLaw::exact(p), {0.0, 1.0}, horizon, reps, seed};
}

}  // namespace

TEST_CASE("walk configuration validation") {
  auto cfg = half_plane(1.5, 8, 10, 1);
  CHECK_NOTHROW(validate(cfg));
  cfg.start = {0.0, -1.0};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.start = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = half_plane(1.5, 0, 10, 1);
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("horizon grids") {
  CHECK(geometric_horizons(4, 6) == std::vector<std::int64_t>{16, 32, 64});
  const std::vector<std::int64_t> unsorted{4, 2}, dup{2, 2}, big{2, 100};
  CHECK_THROWS_AS(check_horizons(unsorted, 10), std::invalid_argument);
  CHECK_THROWS_AS(check_horizons(dup, 10), std::invalid_argument);
  CHECK_THROWS_AS(check_horizons(big, 10), std::invalid_argument);
}

TEST_CASE("one-step survival from e_d matches the marginal oracle") {
  for (auto [alpha, expect] : {std::pair{1.5, oracle::kOneStepSurvival15},
                               std::pair{0.7, oracle::kOneStepSurvival07}}) {
    const auto cfg = half_plane(alpha, 1, 100000, 3);
    const std::vector<std::int64_t> h{1};
    const auto t = survival_curve(cfg, h);
    const double se = std::sqrt(expect * (1.0 - expect) / 100000.0);
    CHECK(std::abs(t.estimate[0] - expect) < 3.0 * se);
    CHECK(t.ci_lo[0] < expect);
    CHECK(t.ci_hi[0] > expect);
  }
}

TEST_CASE("survival is monotone, thread-independent and agrees with single paths") {
  const auto cfg = half_plane(1.5, 256, 5000, 7);
  const auto h = geometric_horizons(0, 8);
  const auto t1 = survival_curve(cfg, h, 1);
  const auto t3 = survival_curve(cfg, h, 3);
  CHECK(t1.survivors == t3.survivors);
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(t1.survivors[i] <= t1.survivors[i - 1]);

  std::int64_t alive = 0;
  for (std::int64_t i = 0; i < cfg.reps; ++i) {
    const auto e = run_walk_exit(cfg, i);
    if (e.tau > 16) ++alive;
  }
  CHECK(alive == t1.survivors[4]);

  const auto again = run_walk_exit(cfg, 42);
  CHECK(again.tau == run_walk_exit(cfg, 42).tau);
  CHECK(again.final_position == run_walk_exit(cfg, 42).final_position);
}

TEST_CASE("log covariance of shared-path survival estimates") {
  SurvivalTable t;
  t.reps = 1000;
  t.horizons = {1, 2};
  t.survivors = {500, 250};
  t.estimate = {0.5, 0.25};
  const std::vector<std::size_t> rows{0, 1};
  const auto c = t.log_covariance(rows);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == doctest::Approx(0.5 / (1000 * 0.5)));
  CHECK(c[1] == doctest::Approx(c[0]));
  CHECK(c[3] == doctest::Approx(0.75 / (1000 * 0.25)));
}

TEST_CASE("coupled survival: joint counts never exceed the marginals") {
  const StableParams p(1.5, 2);
  const ConeSpec cone(2, 1.0);
  const std::vector<Vec> starts{{0.0, 1.0}, {0.3, 2.0}};
  const auto h = geometric_horizons(2, 6);
  const auto run = coupled_survival(cone, IncrementLaw::exact(p), starts, h, 4000, 5);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(run.joint[1][i] <= run.tables[0].survivors[i]);
    CHECK(run.joint[1][i] <= run.tables[1].survivors[i]);
  }
  const std::vector<Vec> outside{{0.0, -1.0}};
  CHECK_THROWS_AS(coupled_survival(cone, IncrementLaw::exact(p), outside, h, 10, 5),
                  std::invalid_argument);
}

TEST_CASE("V_0 is M and V stays near M for the half-space kernel") {
  const StableParams p(1.5, 2);
  auto cfg = half_plane(1.5, 64, 40000, 11);
  cfg.start = {0.0, 2.0};
  const PointFunction m = [&](std::span<const double> x) { return eval_martin_halfspace(p, x); };
  const std::vector<std::int64_t> grid{0, 4, 16, 64};
  const auto v = estimate_V(cfg, grid, m);
  CHECK(v.v_hat[0] == doctest::Approx(std::pow(2.0, 0.75)));
  CHECK(v.se[0] < 1e-6);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    // discrete-time killing misses excursions, so V_m sits at or above M
    CHECK(v.v_hat[i] > v.v_hat[0] - 4.0 * v.se[i]);
    CHECK(v.v_hat[i] < 1.5 * v.v_hat[0]);
  }
}

TEST_CASE("harmonicity residual of V is centred") {
  const StableParams p(1.5, 2);
  auto cfg = half_plane(1.5, 32, 40000, 13);
  const PointFunction m = [&](std::span<const double> x) { return eval_martin_halfspace(p, x); };
  const std::vector<double> x{0.0, 2.0};
  const auto r = harmonicity_residual(cfg, x, 16, 4, 4000, m);
  CHECK(r.se > 0.0);
  CHECK(std::abs(r.residual) < 4.0 * r.se);
}

TEST_CASE("kappa of an exact power law is flat") {
  SurvivalTable t;
  t.reps = 1000000;
  for (int k = 4; k <= 12; ++k) {
    const std::int64_t n = std::int64_t{1} << k;
    const double pr = 0.8 * std::pow(static_cast<double>(n), -0.5);
    t.horizons.push_back(n);
    t.survivors.push_back(std::llround(pr * 1e6));
    t.estimate.push_back(static_cast<double>(t.survivors.back()) / 1e6);
    t.ci_lo.push_back(t.estimate.back() * 0.99);
    t.ci_hi.push_back(t.estimate.back() * 1.01);
    t.degenerate.push_back(false);
  }
  const auto k = estimate_kappa(t, 2.0, 0.01, 0.75, 1.5);
  CHECK(k.plateau == doctest::Approx(0.4).epsilon(0.01));
  CHECK(k.max_rel_drift < 0.02);
  CHECK_FALSE(k.non_plateau);
  CHECK(survival_upper_bound_statistic(t, 0.75, 1.5, 2.0) == doctest::Approx(0.4).epsilon(0.01));
}
