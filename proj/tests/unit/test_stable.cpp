#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "oracle_values.hpp"
#include "stablecone/errors.hpp"
#include "stablecone/stable.hpp"
#include "stablecone/stats.hpp"

using namespace stablecone;

TEST_CASE("parameters outside the admissible range are rejected") {
  CHECK_THROWS_AS(StableParams(1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(2.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(1.5, kMaxDim + 1), std::invalid_argument);
  CHECK_NOTHROW(StableParams(0.7, 3));
}

TEST_CASE("radial density matches the high-precision oracle") {
  for (const auto& p : oracle::kDensity) {
    CAPTURE(p.alpha);
    CAPTURE(p.dim);
    CAPTURE(p.r);
    const StableParams sp(p.alpha, p.dim);
    const double v = p.r == 0.0 ? radial_density_at_zero(sp) : radial_density(sp, p.r).value;
    CHECK(v == doctest::Approx(p.value).epsilon(1e-6));
  }
}

TEST_CASE("density at the origin has the closed form Gamma(d/alpha)") {
  // p_Z(0) = Gamma(d/alpha) / (alpha 2^{d-1} pi^{d/2} Gamma(d/2))
  for (double a : {0.7, 1.5}) {
    for (int d : {1, 2, 3}) {
      const double expect = std::tgamma(d / a) /
                            (a * std::pow(2.0, d - 1) * std::pow(std::numbers::pi, 0.5 * d) *
                             std::tgamma(0.5 * d));
      CHECK(radial_density_at_zero(StableParams(a, d)) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("series and quadrature routes agree where both apply") {
  const StableParams p(1.5, 2);
  for (double r : {0.3, 1.0, 2.0}) {
    const auto s = radial_density_power_series(p, r);
    REQUIRE(s.has_value());
    CHECK(s->value == doctest::Approx(radial_density_quadrature(p, r).value).epsilon(1e-8));
  }
  const StableParams q(0.7, 3);
  const auto t = radial_density_tail_series(q, 20.0);
  REQUIRE(t.has_value());
  CHECK(t->value == doctest::Approx(radial_density_quadrature(q, 20.0).value).epsilon(1e-6));
}

TEST_CASE("radial density integrates to one in d = 2") {
  const StableParams p(1.5, 2);
  const double R = 40.0;
  double mass = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * R / n;
    mass += 2.0 * std::numbers::pi * r * radial_density(p, r).value * R / n;
  }
  // the missing tail P(|Z| > 40) is about 1%
  CHECK(mass < 1.0);
  CHECK(mass > 0.97);
}

TEST_CASE("one-step survival of the sampler matches the marginal oracle") {
  for (auto [alpha, expect] : {std::pair{1.5, oracle::kOneStepSurvival15},
                               std::pair{0.7, oracle::kOneStepSurvival07}}) {
    const auto law = IncrementLaw::exact(StableParams(alpha, 2));
    RngStream rng(17, "one-step", static_cast<std::uint64_t>(alpha * 10));
    const int n = 200000;
    int alive = 0;
    std::vector<double> z(2);
    for (int i = 0; i < n; ++i) {
      law.sample(rng, z);
      if (1.0 + z[1] > 0.0) ++alive;
    }
    const double p = static_cast<double>(alive) / n;
    const double se = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(p - expect) < 4.0 * se);
  }
}

TEST_CASE("the sampler has the characteristic function exp(-|xi|^alpha)") {
  const auto law = IncrementLaw::exact(StableParams(1.5, 3));
  RngStream rng(23, "cf", 0);
  const int n = 200000;
  Moments m;
  std::vector<double> z(3);
  const double xi[3] = {0.3, -0.4, 0.5};
  for (int i = 0; i < n; ++i) {
    law.sample(rng, z);
    m.add(std::cos(xi[0] * z[0] + xi[1] * z[1] + xi[2] * z[2]));
  }
  const double expect = std::exp(-std::pow(std::sqrt(0.5), 1.5));
  CHECK(std::abs(m.mean() - expect) < 4.0 * m.se());
}

TEST_CASE("positive stable variates have the Laplace transform exp(-lambda^a)") {
  RngStream rng(29, "positive", 0);
  Moments m;
  for (int i = 0; i < 200000; ++i) m.add(std::exp(-sample_positive_stable(0.75, rng)));
  CHECK(std::abs(m.mean() - std::exp(-1.0)) < 4.0 * m.se());
  CHECK_THROWS_AS(sample_positive_stable(1.0, rng), std::invalid_argument);
}

TEST_CASE("perturbed law: bounds, support and zero mean") {
  const StableParams p(1.5, 2);
  const double emax = IncrementLaw::max_perturbation(p, 1.0, 2.0);
  CHECK(emax > 0.0);
  CHECK_THROWS_AS(IncrementLaw::perturbed(p, 2.0 * emax), std::invalid_argument);
  CHECK_THROWS_AS(IncrementLaw::perturbed(p, emax, 1.0, 2.0, 1.5), std::invalid_argument);
  const auto law = IncrementLaw::perturbed(p, emax);
  const std::vector<double> far{0.0, 3.0};
  CHECK(density_difference_bound(law, far) == 0.0);
  const std::vector<double> inner{0.2, 0.1};
  CHECK(density_difference_bound(law, inner) > 0.0);
  CHECK_THROWS(density_difference_bound(IncrementLaw::exact(p), inner));

  // the perturbed law puts less mass on the shell 1 < |y| < 2
  RngStream a(31, "shell", 0), b(31, "shell", 1);
  std::vector<double> z(2);
  const int n = 200000;
  int in_exact = 0, in_pert = 0;
  const auto exact = IncrementLaw::exact(p);
  for (int i = 0; i < n; ++i) {
    exact.sample(a, z);
    const double r1 = std::hypot(z[0], z[1]);
    in_exact += r1 > 1.0 && r1 < 2.0;
    law.sample(b, z);
    const double r2 = std::hypot(z[0], z[1]);
    in_pert += r2 > 1.0 && r2 < 2.0;
  }
  // shift of eps * (1 - 0) in shell mass: phi_2 integrates to one
  const double shift = static_cast<double>(in_exact - in_pert) / n;
  CHECK(shift == doctest::Approx(emax).epsilon(0.25));
}

TEST_CASE("ball volume and sphere area") {
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
}

TEST_CASE("Poisson kernel of the ball has unit mass") {
  for (double a : {0.7, 1.5}) {
    for (int d : {1, 2, 3}) {
      for (double q : {0.0, 0.5, 0.9}) {
        CAPTURE(a);
        CAPTURE(d);
        CAPTURE(q);
        CHECK(poisson_ball_mass(StableParams(a, d), 1.0, q).value == doctest::Approx(1.0).epsilon(1e-8));
      }
    }
  }
  CHECK(poisson_ball_mass(StableParams(1.5, 2), 1.0, 0.0, 1.0).value == 0.0);
  const std::vector<double> inside{0.1, 0.0}, w{2.0, 0.0};
  CHECK_THROWS_AS(poisson_ball_density(StableParams(1.5, 2), 1.0, w, inside), std::invalid_argument);
}

TEST_CASE("exit radius law from the centre matches the oracle and the kernel") {
  const StableParams p07(0.7, 2), p15(1.5, 2);
  CHECK(ball_exit_radius_cdf(p07, 1.0, 1.5) == doctest::Approx(oracle::kBallCdf07).epsilon(1e-10));
  CHECK(ball_exit_radius_cdf(p15, 1.0, 1.5) == doctest::Approx(oracle::kBallCdf15).epsilon(1e-10));
  CHECK(poisson_ball_mass(p15, 1.0, 0.0, 1.5).value ==
        doctest::Approx(ball_exit_radius_cdf(p15, 1.0, 1.5)).epsilon(1e-8));
}

TEST_CASE("off-centre exit sampler matches the kernel radius CDF") {
  const StableParams p(1.5, 2);
  const std::vector<double> theta{0.5, 0.0};
  RngStream rng(37, "exit", 0);
  std::vector<double> out(2), radii;
  for (int i = 0; i < 20000; ++i) {
    sample_ball_exit(p, 1.0, theta, rng, out);
    const double r = std::hypot(out[0], out[1]);
    REQUIRE(r >= 1.0 - 1e-12);
    radii.push_back(r);
  }
  std::sort(radii.begin(), radii.end());
  for (double prob : {0.25, 0.5, 0.75}) {
    const double rho = quantile(radii, prob);
    CHECK(poisson_ball_mass(p, 1.0, 0.5, rho).value == doctest::Approx(prob).epsilon(0.05));
  }
}
