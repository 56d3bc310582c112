#include "stablecone/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "stablecone/errors.hpp"

namespace stablecone {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

StableParams::StableParams(double alpha, int dim) : alpha_(alpha), dim_(dim) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::invalid_argument("alpha must lie in (0,2), got " + std::to_string(alpha));
  }
  if (alpha == 1.0) {
    throw std::invalid_argument("alpha = 1 is excluded (alpha must differ from 1)");
  }
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("dim must lie in [1," + std::to_string(kMaxDim) + "], got " +
                                std::to_string(dim));
  }
}

double unit_ball_volume(int dim) {
  return std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

double unit_sphere_area(int dim) {
  return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

// ---------------------------------------------------------------------------
// Samplers

double sample_positive_stable(double alpha_half, RngStream& rng) {
  if (!(alpha_half > 0.0 && alpha_half < 1.0)) {
    throw std::invalid_argument("positive stable index must lie in (0,1), got " +
                                std::to_string(alpha_half));
  }
  const double a = alpha_half;
  const double u = kPi * rng.uniform();
  const double e = rng.exponential();
  const double lead = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a);
  const double tail = std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
  return lead * tail;
}

void sample_direction(RngStream& rng, std::span<double> out) {
  for (;;) {
    double s = 0.0;
    for (double& x : out) {
      x = rng.normal();
      s += x * x;
    }
    if (s > 0.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (double& x : out) x *= inv;
      return;
    }
  }
}

namespace {

void sample_exact(const StableParams& p, RngStream& rng, std::span<double> out) {
  const double scale = std::sqrt(2.0 * sample_positive_stable(0.5 * p.alpha(), rng));
  for (double& x : out) x = scale * rng.normal();
}

void sample_uniform_ball(double radius, RngStream& rng, std::span<double> out) {
  sample_direction(rng, out);
  const double rho = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(out.size()));
  for (double& x : out) x *= rho;
}

}  // namespace

void sample_isotropic_increment(const IncrementLaw& law, RngStream& rng, std::span<double> out) {
  if (static_cast<int>(out.size()) != law.dim()) {
    throw std::invalid_argument("output span does not match the law dimension");
  }
  law.sample(rng, out);
}

Vec sample_isotropic_increment(const IncrementLaw& law, RngStream& rng) {
  Vec out(static_cast<std::size_t>(law.dim()));
  law.sample(rng, out);
  return out;
}

// ---------------------------------------------------------------------------
// Radial density

double radial_density_at_zero(const StableParams& p) {
  const int d = p.dim();
  const double a = p.alpha();
  return std::pow(2.0 * kPi, -d) * unit_sphere_area(d) * std::tgamma(d / a) / a;
}

std::optional<QuadResult> radial_density_tail_series(const StableParams& p, double r) {
  if (!(r > 0.0)) return std::nullopt;
  const double a = p.alpha();
  const double d = p.dim();
  const double log2r = std::log(2.0 / r);
  double sum = 0.0;
  double max_term = 0.0;
  double prev_mag = INFINITY;
  double omitted = INFINITY;
  constexpr int kMaxTerms = 400;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double log_mag = std::lgamma(0.5 * a * k + 1.0) + std::lgamma(0.5 * (a * k + d)) -
                           std::lgamma(k + 1.0) + a * k * log2r;
    const double mag = std::exp(log_mag);
    if (a > 1.0 && mag > prev_mag && k > 1) {
      // asymptotic series: stop at the smallest term
      omitted = prev_mag;
      break;
    }
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double term = sign * mag * std::sin(0.5 * kPi * a * k);
    sum += term;
    max_term = std::max(max_term, mag);
    prev_mag = mag;
    if (mag < 1e-18 * std::abs(sum) && k > 2) {
      omitted = mag;
      break;
    }
  }
  if (!std::isfinite(omitted) || sum <= 0.0) return std::nullopt;
  const double pref = std::pow(r, -d) * std::pow(kPi, -0.5 * d - 1.0);
  const double err = omitted + 4e-16 * max_term * 8.0;
  return QuadResult{pref * sum, pref * err};
}

std::optional<QuadResult> radial_density_power_series(const StableParams& p, double r) {
  const double a = p.alpha();
  if (a < 1.0) return std::nullopt;
  const double d = p.dim();
  if (r == 0.0) return QuadResult{radial_density_at_zero(p), 0.0};
  const double log_half_r2 = 2.0 * std::log(0.5 * r);
  double sum = 0.0;
  double max_term = 0.0;
  double omitted = INFINITY;
  bool past_peak = false;
  double prev = 0.0;
  constexpr int kMaxTerms = 2000;
  for (int k = 0; k <= kMaxTerms; ++k) {
    const double log_mag = std::lgamma((2.0 * k + d) / a) - std::lgamma(k + 1.0) -
                           std::lgamma(k + 0.5 * d) + k * log_half_r2;
    const double mag = std::exp(log_mag);
    if (k > 0 && mag < prev) past_peak = true;
    prev = mag;
    sum += (k % 2 == 0) ? mag : -mag;
    max_term = std::max(max_term, mag);
    if (past_peak && mag < 1e-18 * std::abs(sum)) {
      omitted = mag;
      break;
    }
  }
  if (!std::isfinite(omitted) || sum <= 0.0 || !std::isfinite(max_term)) return std::nullopt;
  const double pref = std::pow(2.0, 1.0 - d) / (a * std::pow(kPi, 0.5 * d));
  const double err = omitted + 1.2e-16 * max_term * 16.0;
  return QuadResult{pref * sum, pref * err};
}

QuadResult radial_density_quadrature(const StableParams& p, double r, double rel_tol) {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (r == 0.0) return {radial_density_at_zero(p), 0.0};
  const double a = p.alpha();
  const int d = p.dim();
  const double nu = 0.5 * d - 1.0;
  const double half_d = 0.5 * d;

  auto integrand = [&](double s) -> double {
    const double damp = std::exp(-std::pow(s, a));
    if (d == 1) return damp * std::sqrt(2.0 / (kPi * r)) * std::cos(r * s);
    if (d == 3) return damp * s * std::sqrt(2.0 / (kPi * r)) * std::sin(r * s);
    return damp * std::pow(s, half_d) * boost::math::cyl_bessel_j(nu, r * s);
  };

  // e^{-s^alpha} < e^{-50} beyond s_end.
  const double s_end = std::pow(50.0, 1.0 / a);
  double width = kPi / r;
  if (width > s_end / 32.0) width = s_end / 32.0;
  double sum = 0.0;
  double err_sum = 0.0;
  double lo = 0.0;
  while (lo < s_end) {
    const double hi = std::min(lo + width, s_end);
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, lo, hi, 12, rel_tol * 1e-2, &err);
    sum += v;
    // boost reports the error on the reference interval [-1,1]
    err_sum += std::abs(err) * 0.5 * (hi - lo) + 1e-16 * std::abs(v);
    lo = hi;
  }
  const double pref = std::pow(2.0 * kPi, -half_d) * std::pow(r, 1.0 - half_d);
  // the oscillating windows cancel; report absolute error of the sum
  const double trunc = std::exp(-50.0) * std::pow(s_end, half_d + 1.0);
  return {pref * sum, pref * (err_sum + trunc)};
}

QuadResult radial_density(const StableParams& p, double r) {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (r == 0.0) return {radial_density_at_zero(p), 0.0};
  std::optional<QuadResult> best;
  auto consider = [&](std::optional<QuadResult> c) {
    if (!c || !(c->value > 0.0)) return;
    if (!best || c->abs_error / c->value < best->abs_error / best->value) best = c;
  };
  consider(radial_density_tail_series(p, r));
  consider(radial_density_power_series(p, r));
  if (best && best->abs_error <= 1e-10 * best->value) return *best;
  consider(radial_density_quadrature(p, r));
  if (!best || best->abs_error > 1e-6 * std::abs(best->value)) {
    const double v = best ? best->value : 0.0;
    const double e = best ? best->abs_error : INFINITY;
    throw QuadratureError("radial density did not reach relative error 1e-6 at r=" +
                              std::to_string(r),
                          v, e);
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Density table

RadialDensityTable::RadialDensityTable(const StableParams& params, double lo, double hi,
                                       int nodes)
    : lo_(lo), hi_(hi) {
  if (!(lo >= 0.0 && hi > lo) || nodes < 4) {
    throw std::invalid_argument("bad radial table range");
  }
  nodes_.resize(static_cast<std::size_t>(nodes));
  values_.resize(nodes_.size());
  weights_.resize(nodes_.size());
  for (int j = 0; j < nodes; ++j) {
    const double theta = kPi * (j + 0.5) / nodes;
    const double x = std::cos(theta);
    nodes_[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
    values_[j] = radial_density(params, nodes_[j]).value;
    weights_[j] = ((j % 2 == 0) ? 1.0 : -1.0) * std::sin(theta);
  }
  min_value_ = INFINITY;
  constexpr int kScan = 257;
  for (int i = 0; i < kScan; ++i) {
    const double r = lo + (hi - lo) * i / (kScan - 1);
    min_value_ = std::min(min_value_, radial_density(params, r).value);
  }
}

double RadialDensityTable::operator()(double r) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double diff = r - nodes_[j];
    if (diff == 0.0) return values_[j];
    const double w = weights_[j] / diff;
    num += w * values_[j];
    den += w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Increment laws

IncrementLaw::IncrementLaw(const StableParams& params, std::optional<Perturbation> pert,
                           std::shared_ptr<const RadialDensityTable> table)
    : params_(params), pert_(pert), shell_table_(std::move(table)) {
  if (pert_) {
    const int d = params_.dim();
    phi1_ = 1.0 / (unit_ball_volume(d) * std::pow(pert_->r1, d));
    phi2_ = 1.0 / (unit_ball_volume(d) * (std::pow(pert_->r3, d) - std::pow(pert_->r2, d)));
  }
}

IncrementLaw IncrementLaw::exact(const StableParams& params) {
  return IncrementLaw(params, std::nullopt, nullptr);
}

double IncrementLaw::max_perturbation(const StableParams& params, double r2, double r3) {
  const RadialDensityTable table(params, r2, r3);
  const int d = params.dim();
  const double shell_volume = unit_ball_volume(d) * (std::pow(r3, d) - std::pow(r2, d));
  return 0.5 * table.min_value() * shell_volume;
}

IncrementLaw IncrementLaw::perturbed(const StableParams& params, double eps, double r1, double r2,
                                     double r3) {
  if (!(r1 > 0.0 && r2 > 0.0 && r3 > r2)) {
    throw std::invalid_argument("perturbation radii must satisfy r1 > 0 and 0 < r2 < r3");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps_pert must lie in (0,1)");
  }
  auto table = std::make_shared<const RadialDensityTable>(params, r2, r3);
  const int d = params.dim();
  const double shell_volume = unit_ball_volume(d) * (std::pow(r3, d) - std::pow(r2, d));
  const double limit = 0.5 * table->min_value() * shell_volume;
  if (eps > limit) {
    throw std::invalid_argument("eps_pert " + std::to_string(eps) +
                                " exceeds the positivity threshold " + std::to_string(limit));
  }
  return IncrementLaw(params, Perturbation{eps, r1, r2, r3}, std::move(table));
}

double IncrementLaw::perturbation_shape(std::span<const double> y) const {
  if (!pert_) return 0.0;
  const double r = norm(y);
  double v = 0.0;
  if (r < pert_->r1) v += phi1_;
  if (r > pert_->r2 && r < pert_->r3) v -= phi2_;
  return v;
}

void IncrementLaw::sample(RngStream& rng, std::span<double> out) const {
  if (!pert_) {
    sample_exact(params_, rng, out);
    return;
  }
  // Signed mixture: eps from phi_1, otherwise Z thinned by 1 - eps phi_2 / p_Z.
  if (rng.uniform() < pert_->eps) {
    sample_uniform_ball(pert_->r1, rng, out);
    return;
  }
  for (;;) {
    sample_exact(params_, rng, out);
    const double r = norm(out);
    if (!(r > pert_->r2 && r < pert_->r3)) return;
    const double keep = 1.0 - pert_->eps * phi2_ / (*shell_table_)(r);
    if (rng.uniform() < keep) return;
  }
}

double density_difference_bound(const IncrementLaw& law, std::span<const double> y) {
  if (!law.is_perturbed()) {
    throw std::invalid_argument("density_difference_bound needs a perturbed law");
  }
  return law.perturbation()->eps * std::abs(law.perturbation_shape(y));
}

// ---------------------------------------------------------------------------
// Ball exit

double poisson_ball_density(const StableParams& params, double r, std::span<const double> theta,
                            std::span<const double> w) {
  const int d = params.dim();
  if (static_cast<int>(theta.size()) != d || static_cast<int>(w.size()) != d) {
    throw std::invalid_argument("poisson_ball_density: dimension mismatch");
  }
  const double t = norm(theta);
  const double wn = norm(w);
  if (!(t < r)) throw std::invalid_argument("poisson_ball_density: need |theta| < r");
  if (!(wn > r)) throw std::invalid_argument("poisson_ball_density: need |w| > r");
  double dist2 = 0.0;
  for (int i = 0; i < d; ++i) dist2 += (w[i] - theta[i]) * (w[i] - theta[i]);
  const double a = params.alpha();
  const double c = std::tgamma(0.5 * d) * std::sin(0.5 * kPi * a) * std::pow(kPi, -0.5 * d - 1.0);
  return c * std::pow((r * r - t * t) / (wn * wn - r * r), 0.5 * a) * std::pow(dist2, -0.5 * d);
}

QuadResult poisson_ball_mass(const StableParams& params, double r, double q, double rho_max) {
  if (!(r > 0.0) || !(q >= 0.0) || !(q < 1.0) || std::isnan(rho_max)) {
    throw std::invalid_argument("poisson_ball_mass: need r > 0 and 0 <= q < 1");
  }
  if (rho_max <= r) return {};
  const int d = params.dim();
  const double a = params.alpha();
  const double c = std::tgamma(0.5 * d) * std::sin(0.5 * kPi * a) * std::pow(kPi, -0.5 * d - 1.0);
  // rho^d times the angular integral of |w - theta|^{-d} over |w| = rho,
  // as a function of s = |theta| / rho
  auto angular = [&](double s) {
    auto kern = [&](double phi) {
      return std::pow(1.0 + s * s - 2.0 * s * std::cos(phi), -0.5 * d);
    };
    if (d == 1) return kern(0.0) + kern(kPi);
    using boost::math::quadrature::gauss_kronrod;
    return unit_sphere_area(d - 1) *
           gauss_kronrod<double, 61>::integrate(
               [&](double phi) { return kern(phi) * std::pow(std::sin(phi), d - 2); }, 0.0, kPi,
               15, 1e-12);
  };
  // u = r^2 / rho^2 maps (r, inf) to (0, 1); the Jacobian and the radial
  // factors combine to u^{alpha/2 - 1} (1 - q^2)^{alpha/2} (1 - u)^{-alpha/2} / 2
  const double u0 = std::isinf(rho_max) ? 0.0 : (r / rho_max) * (r / rho_max);
  auto outer = [&](double u, double uc) {
    const double one_minus = u > 0.5 * (1.0 + u0) ? uc : 1.0 - u;
    if (!(u > 0.0) || !(one_minus > 0.0)) return 0.0;
    const double w = std::pow((1.0 - q * q) / one_minus, 0.5 * a) * std::pow(u, 0.5 * a - 1.0);
    return 0.5 * c * w * angular(q * std::sqrt(u));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  QuadResult res;
  res.value = ts.integrate(outer, u0, 1.0, 1e-11, &res.abs_error);
  return res;
}

double ball_exit_radius_cdf(const StableParams& params, double r, double rho) {
  if (rho <= r) return 0.0;
  const double a = 0.5 * params.alpha();
  return 1.0 - boost::math::ibeta(a, 1.0 - a, (r * r) / (rho * rho));
}

void sample_ball_exit(const StableParams& params, double r, std::span<const double> theta,
                      RngStream& rng, std::span<double> out) {
  const int d = params.dim();
  if (static_cast<int>(theta.size()) != d || static_cast<int>(out.size()) != d) {
    throw std::invalid_argument("sample_ball_exit: dimension mismatch");
  }
  const double t = norm(theta);
  if (!(t < r)) throw std::invalid_argument("sample_ball_exit: need |theta| < r");
  const double a = 0.5 * params.alpha();

  auto centred = [&](std::span<double> w) {
    const double beta = rng.beta(a, 1.0 - a);
    const double rho = r / std::sqrt(beta);
    sample_direction(rng, w);
    for (double& x : w) x *= rho;
  };

  if (t == 0.0) {
    centred(out);
    return;
  }
  const double q = t / r;
  for (int iter = 0; iter < kBallExitRejectionCap; ++iter) {
    centred(out);
    double dist2 = 0.0;
    for (int i = 0; i < d; ++i) dist2 += (out[i] - theta[i]) * (out[i] - theta[i]);
    const double ratio = norm(out) * (1.0 - q) / std::sqrt(dist2);
    if (rng.uniform() < std::pow(ratio, d)) return;
  }
  const double rate = std::pow(1.0 - q, d) / std::pow(1.0 - q * q, a);
  throw RejectionCapError("ball exit rejection cap exceeded at |theta|/r=" + std::to_string(q),
                          rate);
}

}  // namespace stablecone
