#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "stablecone/cone.hpp"

using namespace stablecone;

TEST_CASE("cone construction") {
  CHECK_THROWS_AS(ConeSpec(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ConeSpec(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ConeSpec(2, std::numbers::pi), std::invalid_argument);
  CHECK(ConeSpec(3, std::numbers::pi / 2).is_half_space());
  CHECK_FALSE(ConeSpec(3, 1.0).is_half_space());
}

TEST_CASE("membership is open") {
  const ConeSpec half(2, std::numbers::pi / 2);
  const std::vector<double> origin{0, 0}, on_boundary{1, 0}, inside{1, 1e-12}, below{0, -1};
  CHECK_FALSE(contains(half, origin));
  CHECK_FALSE(contains(half, on_boundary));
  CHECK(contains(half, inside));
  CHECK_FALSE(contains(half, below));

  const ConeSpec narrow(3, std::numbers::pi / 4);
  const std::vector<double> edge{1, 0, 1}, in{0.5, 0.5, 1}, out{1, 1, 1};
  CHECK_FALSE(contains(narrow, edge));
  CHECK(contains(narrow, in));
  CHECK_FALSE(contains(narrow, out));

  const ConeSpec wide(2, 3.0);
  const std::vector<double> low{1, -0.5};
  CHECK(contains(wide, low));
}

TEST_CASE("axis angle and distance to the boundary") {
  const std::vector<double> v{1, 0, 1};
  CHECK(axis_angle(v) == doctest::Approx(std::numbers::pi / 4));
  const ConeSpec half(3, std::numbers::pi / 2);
  const std::vector<double> x{3, -4, 2.5};
  CHECK(dist_to_boundary(half, x) == doctest::Approx(2.5));

  // distance = |x| sin(theta - psi) for psi < theta, capped at pi/2
  const ConeSpec c(2, std::numbers::pi / 3);
  const auto u = unit_at_angle(2, 0.2);
  CHECK(dist_to_boundary(c, u) == doctest::Approx(std::sin(std::numbers::pi / 3 - 0.2)));
  const ConeSpec w(2, 2.5);
  const std::vector<double> axis{0, 2};
  CHECK(dist_to_boundary(w, axis) == doctest::Approx(2.0));
  const std::vector<double> outside{0, -1};
  CHECK_THROWS_AS(dist_to_boundary(c, outside), std::invalid_argument);
}

TEST_CASE("interior grid") {
  const ConeSpec c(3, 1.0);
  const std::vector<double> radii{1, 2}, angles{0.0, 0.5};
  const auto g = sample_interior_grid(c, radii, angles);
  REQUIRE(g.size() == 4);
  for (const auto& x : g) CHECK(contains(c, x));
  const std::vector<double> bad_angle{1.0};
  CHECK_THROWS_AS(sample_interior_grid(c, radii, bad_angle), std::invalid_argument);
  const std::vector<double> bad_r{0.0};
  CHECK_THROWS_AS(sample_interior_grid(c, bad_r, angles), std::invalid_argument);
}
