#include "stablecone/cone.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stablecone {

ConeSpec::ConeSpec(int dim, double theta) : dim_(dim), theta_(theta) {
  if (dim < 2) throw std::invalid_argument("cone dimension must be at least 2");
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    throw std::invalid_argument("cone aperture must lie in (0, pi), got " + std::to_string(theta));
  }
}

bool ConeSpec::is_half_space() const { return theta_ == std::numbers::pi / 2; }

double axis_angle(std::span<const double> x) {
  const std::size_t d = x.size();
  double perp2 = 0.0;
  for (std::size_t i = 0; i + 1 < d; ++i) perp2 += x[i] * x[i];
  return std::atan2(std::sqrt(perp2), x[d - 1]);
}

bool contains(const ConeSpec& cone, std::span<const double> x) {
  if (static_cast<int>(x.size()) != cone.dim()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  bool nonzero = false;
  for (double v : x) nonzero = nonzero || v != 0.0;
  if (!nonzero) return false;
  return axis_angle(x) < cone.theta();
}

double dist_to_boundary(const ConeSpec& cone, std::span<const double> x) {
  if (!contains(cone, x)) throw std::invalid_argument("dist_to_boundary: point is not in the cone");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  const double gap = cone.theta() - axis_angle(x);
  if (gap <= std::numbers::pi / 2) return r * std::sin(gap);
  return r;
}

std::vector<double> unit_at_angle(int dim, double psi) {
  std::vector<double> u(static_cast<std::size_t>(dim), 0.0);
  u[dim - 1] = std::cos(psi);
  if (dim > 1) u[0] = std::sin(psi);
  return u;
}

std::vector<std::vector<double>> sample_interior_grid(const ConeSpec& cone,
                                                      std::span<const double> radii,
                                                      std::span<const double> angles) {
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("grid radii must be positive");
  }
  for (double psi : angles) {
    if (!(psi >= 0.0 && psi < cone.theta())) {
      throw std::invalid_argument("grid angle " + std::to_string(psi) +
                                  " is not in [0, theta)");
    }
  }
  std::vector<std::vector<double>> out;
  out.reserve(radii.size() * angles.size());
  for (double r : radii) {
    for (double psi : angles) {
      auto u = unit_at_angle(cone.dim(), psi);
      for (double& c : u) c *= r;
      out.push_back(std::move(u));
    }
  }
  return out;
}

}  // namespace stablecone
