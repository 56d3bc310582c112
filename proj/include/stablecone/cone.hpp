#pragma once

#include <span>
#include <vector>

namespace stablecone {

// Right circular cone { x : angle(x, e_d) < theta } with axis e_d = (0,...,0,1).
class ConeSpec {
 public:
  // Throws std::invalid_argument unless dim >= 2 and 0 < theta < pi.
  ConeSpec(int dim, double theta);

  int dim() const { return dim_; }
  double theta() const { return theta_; }
  bool is_half_space() const;

  friend bool operator==(const ConeSpec&, const ConeSpec&) = default;

 private:
  int dim_;
  double theta_;
};

// atan2(|x - (x.e_d) e_d|, x_d), in [0, pi].
double axis_angle(std::span<const double> x);

// Open cone: the origin and boundary points (ties included) are outside.
bool contains(const ConeSpec& cone, std::span<const double> x);

// delta(x) = dist(x, boundary). Throws std::invalid_argument outside the cone.
double dist_to_boundary(const ConeSpec& cone, std::span<const double> x);

// Product grid r (sin psi, 0, ..., 0, cos psi). Throws std::invalid_argument
// for radii <= 0 or angles outside [0, theta).
std::vector<std::vector<double>> sample_interior_grid(const ConeSpec& cone,
                                                      std::span<const double> radii,
                                                      std::span<const double> angles);

// Unit vector at angle psi from the axis in the (e_1, e_d) plane.
std::vector<double> unit_at_angle(int dim, double psi);

}  // namespace stablecone
