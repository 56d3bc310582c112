#pragma once

// Isotropic alpha-stable increments with characteristic function
// E exp(i xi.Z) = exp(-|xi|^alpha), alpha in (0,2) \ {1}, plus the
// compactly perturbed increment law, the radial density of Z and the exact
// exit law of Z from a ball.

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stablecone/rng.hpp"

namespace stablecone {

inline constexpr int kMaxDim = 8;

using Vec = std::vector<double>;

class StableParams {
 public:
  // Throws std::invalid_argument unless alpha in (0,2), alpha != 1 and
  // 1 <= dim <= kMaxDim.
  StableParams(double alpha, int dim);

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }

  friend bool operator==(const StableParams&, const StableParams&) = default;

 private:
  double alpha_;
  int dim_;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
};

// Chebyshev interpolant of p_Z on [lo, hi]; used wherever the sampler needs
// the density at random radii.
class RadialDensityTable {
 public:
  RadialDensityTable(const StableParams& params, double lo, double hi, int nodes = 48);
  double operator()(double r) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double min_value() const { return min_value_; }

 private:
  double lo_, hi_;
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> weights_;
  double min_value_;
};

struct Perturbation {
  double eps;
  double r1;  // phi_1 uniform on B(0, r1)
  double r2;  // phi_2 uniform on the shell r2 < |y| < r3
  double r3;
};

// p_X = p_Z + eps (phi_1 - phi_2). Both perturbations are radial and
// compactly supported, so p_X - p_Z vanishes outside B(0, r3) and X has
// zero mean whenever Z does.
class IncrementLaw {
 public:
  static IncrementLaw exact(const StableParams& params);
  // Throws std::invalid_argument when eps exceeds max_perturbation(), or the
  // radii are not 0 < r1, 0 < r2 < r3.
  static IncrementLaw perturbed(const StableParams& params, double eps, double r1 = 1.0,
                                double r2 = 1.0, double r3 = 2.0);

  // Largest eps allowed: half of min_{shell} p_Z divided by max phi_2.
  static double max_perturbation(const StableParams& params, double r2, double r3);

  const StableParams& params() const { return params_; }
  int dim() const { return params_.dim(); }
  bool is_perturbed() const { return pert_.has_value(); }
  const std::optional<Perturbation>& perturbation() const { return pert_; }

  // phi_1(y) - phi_2(y); zero for the exact law.
  double perturbation_shape(std::span<const double> y) const;

  // Draw one increment into out (size dim).
  void sample(RngStream& rng, std::span<double> out) const;

 private:
  IncrementLaw(const StableParams& params, std::optional<Perturbation> pert,
               std::shared_ptr<const RadialDensityTable> table);

  StableParams params_;
  std::optional<Perturbation> pert_;
  std::shared_ptr<const RadialDensityTable> shell_table_;
  double phi1_ = 0.0;
  double phi2_ = 0.0;
};

double unit_ball_volume(int dim);
double unit_sphere_area(int dim);

// Positive (alpha_half)-stable A with E exp(-lambda A) = exp(-lambda^alpha_half),
// via Kanter's representation. Throws std::invalid_argument outside (0,1).
double sample_positive_stable(double alpha_half, RngStream& rng);

// Uniform direction on the unit sphere S^{d-1}.
void sample_direction(RngStream& rng, std::span<double> out);

void sample_isotropic_increment(const IncrementLaw& law, RngStream& rng, std::span<double> out);
Vec sample_isotropic_increment(const IncrementLaw& law, RngStream& rng);

// p_Z at |y| = r. Chooses between the convergent/asymptotic series and the
// oscillatory Hankel quadrature by their error estimates. Throws
// QuadratureError when no route reaches relative error 1e-6.
QuadResult radial_density(const StableParams& params, double r);

// Hankel inversion (2pi)^{-d/2} r^{1-d/2} int_0^inf e^{-s^alpha} s^{d/2}
// J_{d/2-1}(r s) ds, integrated window by window with Gauss-Kronrod.
QuadResult radial_density_quadrature(const StableParams& params, double r,
                                     double rel_tol = 1e-10);

// Large-r expansion in powers of r^{-alpha}; convergent for alpha < 1,
// asymptotic for alpha > 1 (truncated at the smallest term).
std::optional<QuadResult> radial_density_tail_series(const StableParams& params, double r);

// Small-r expansion in powers of r^2; only for alpha > 1, where it is entire.
std::optional<QuadResult> radial_density_power_series(const StableParams& params, double r);

double radial_density_at_zero(const StableParams& params);

// Poisson kernel of B_r(0) for Z:
// Gamma(d/2) sin(pi alpha/2) pi^{-d/2-1} ((r^2-|theta|^2)/(|w|^2-r^2))^{alpha/2} |w-theta|^{-d}.
// Throws std::invalid_argument unless |theta| < r < |w|.
double poisson_ball_density(const StableParams& params, double r, std::span<const double> theta,
                            std::span<const double> w);

// Mass of P_r(theta, .) over r < |w| < rho_max (zero when rho_max <= r) with |theta| = q r, by nested
// quadrature (radial tanh-sinh, angular Gauss-Kronrod). The default gives the
// total mass; a finite rho_max gives the exit radius CDF.
QuadResult poisson_ball_mass(const StableParams& params, double r, double q,
                             double rho_max = std::numeric_limits<double>::infinity());

// Law of |Z(tau)| for Z started at the centre of B_r(0):
// r^2/|Z(tau)|^2 ~ Beta(alpha/2, 1 - alpha/2).
double ball_exit_radius_cdf(const StableParams& params, double r, double rho);

inline constexpr int kBallExitRejectionCap = 10000;

// Exit position of Z started at theta from B_r(0). Centre start: Beta radius
// plus uniform direction. Off-centre: rejection against the centre law with
// the bound (1-q^2)^{alpha/2} (1-q)^{-d}, q = |theta|/r. Throws
// RejectionCapError after kBallExitRejectionCap proposals.
void sample_ball_exit(const StableParams& params, double r, std::span<const double> theta,
                      RngStream& rng, std::span<double> out);

// |p_X(y) - p_Z(y)| = eps |phi_1(y) - phi_2(y)|; throws for the exact law.
double density_difference_bound(const IncrementLaw& law, std::span<const double> y);

}  // namespace stablecone
