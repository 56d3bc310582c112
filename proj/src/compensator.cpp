#include "stablecone/compensator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "stablecone/errors.hpp"
#include "stablecone/parallel.hpp"

namespace stablecone {

namespace {

constexpr double kPi = std::numbers::pi;

double dist2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

// int_0^z (t(t+1))^{a-1} dt = B_v(a, 1 - 2a), v = z/(1+z). For a > 1/2 the
// second parameter is negative; one step of the contiguous relation moves it
// to 2 - 2a > 0.
double halfline_integral(double a, double z) {
  if (z <= 0.0) return 0.0;
  const double v = z / (1.0 + z);
  const double b = 1.0 - 2.0 * a;
  if (b > 0.0) return boost::math::beta(a, b, v);
  // 1 - v = 1/(1+z)
  return ((1.0 - a) * boost::math::beta(a, b + 1.0, v) - std::pow(v, a) * std::pow(1.0 + z, -b)) / b;
}

}  // namespace

double default_epsilon(double alpha) { return alpha > 1.0 ? 0.5 : 0.3; }

void CompensatorConfig::validate() const {
  if (!(epsilon > 0.0) || epsilon > params.alpha()) {
    throw std::invalid_argument("compensator: epsilon must lie in (0, alpha]");
  }
  if (!(R >= 0.0)) throw std::invalid_argument("compensator: R must be >= 0");
  if (!(c >= 0.0)) throw std::invalid_argument("compensator: c must be >= 0");
  if (mc_samples < 2) throw std::invalid_argument("compensator: mc_samples must be >= 2");
}

CompensatorConfig make_compensator_config(const StableParams& params) {
  return CompensatorConfig{params, default_epsilon(params.alpha())};
}

GreenHalfspace::GreenHalfspace(const StableParams& p) : params(p), kappa(0.0) {
  const double d = p.dim();
  const double a = 0.5 * p.alpha();
  if (p.dim() > 1 && !(d > p.alpha())) {
    throw std::invalid_argument("green_halfspace needs d > alpha");
  }
  kappa = std::tgamma(0.5 * d) /
          (std::pow(2.0, p.alpha()) * std::pow(kPi, 0.5 * d) * std::tgamma(a) * std::tgamma(a));
}

double green_halfline(double alpha, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) return 0.0;
  if (x == y && alpha < 1.0) throw std::invalid_argument("green function has a pole at x == y");
  const double a = 0.5 * alpha;
  // below this gap the value has converged to its diagonal limit
  const double r = std::max(std::abs(x - y), 1e-12 * std::min(x, y));
  const double ga = std::tgamma(a);
  return std::pow(r, alpha - 1.0) * halfline_integral(a, std::min(x, y) / r) / (ga * ga);
}

double green_halfspace(const GreenHalfspace& g, std::span<const double> x,
                       std::span<const double> y) {
  const int d = g.params.dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d) {
    throw std::invalid_argument("green_halfspace: dimension mismatch");
  }
  const double xd = x.back(), yd = y.back();
  if (!(xd > 0.0) || !(yd > 0.0)) return 0.0;
  const double r2 = dist2(x, y);
  if (r2 == 0.0) throw std::invalid_argument("green function has a pole at x == y");
  if (d == 1) return green_halfline(g.params.alpha(), xd, yd);
  const double a = 0.5 * g.params.alpha();
  const double b = 0.5 * d - a;
  const double zeta = 4.0 * xd * yd / r2;
  const double t = zeta / (1.0 + zeta);
  return g.kappa * std::pow(r2, 0.5 * (g.params.alpha() - d)) * boost::math::beta(a, b, t);
}

double green_envelope_halfspace(const StableParams& params, std::span<const double> x,
                                std::span<const double> y) {
  const double d = params.dim();
  const double al = params.alpha();
  if (!(d > al)) throw std::invalid_argument("green envelope needs d > alpha");
  const double A = std::tgamma(0.5 * (d - al)) /
                   (std::pow(2.0, al) * std::pow(kPi, 0.5 * d) * std::tgamma(0.5 * al));
  const double r = std::sqrt(dist2(x, y));
  const double near = A * std::pow(r, al - d);
  const double far = std::pow(x.back() * y.back(), 0.5 * al) * std::pow(r, -d);
  return std::min(near, far);
}

double martin_halfspace(const StableParams& params, std::span<const double> x) {
  return x.back() > 0.0 ? std::pow(x.back(), 0.5 * params.alpha()) : 0.0;
}

double lambda_weight_height(const CompensatorConfig& cfg, double y_d) {
  if (!(y_d > 0.0)) return 0.0;
  const double al = cfg.params.alpha();
  return std::pow(y_d, 0.5 * al) / std::pow(1.0 + y_d, al + 0.5 * cfg.epsilon);
}

double lambda_weight(const CompensatorConfig& cfg, std::span<const double> y) {
  return lambda_weight_height(cfg, y.back());
}

McValue u_lambda_mc(const CompensatorConfig& cfg, const GreenHalfspace& g,
                    std::span<const double> x, RngStream& stream, double rel_tol) {
  cfg.validate();
  const int d = cfg.params.dim();
  if (static_cast<int>(x.size()) != d || !(x.back() > 0.0)) {
    throw std::invalid_argument("u_lambda_mc: x must be an interior point");
  }
  const double al = cfg.params.alpha();
  const double delta = x.back();
  const double gam = 0.5 * cfg.epsilon;
  const double area = unit_sphere_area(d);

  std::array<double, kMaxDim> dir{};
  std::array<double, kMaxDim> y{};
  const std::span<double> dirs(dir.data(), static_cast<std::size_t>(d));
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(d));
  // ratio f/q for one draw from the near (true) or far (false) component
  auto draw = [&](RngStream& rng, bool near_part) {
    const double u = rng.uniform();
    const double rho = near_part ? delta * std::pow(u, 1.0 / al) : delta * std::pow(u, -1.0 / gam);
    sample_direction(rng, dirs);
    for (int i = 0; i < d; ++i) y[i] = x[i] + rho * dir[i];
    if (!(y[d - 1] > 0.0)) return 0.0;
    const double q = near_part
                         ? al * std::pow(rho, al - 1.0) * std::pow(delta, -al)
                         : gam * std::pow(delta, gam) * std::pow(rho, -gam - 1.0);
    const double f = green_halfspace(g, x, ys) * lambda_weight(cfg, ys);
    return f * area * std::pow(rho, d - 1) / q;
  };

  RngStream pilot = stream.split(0x70696c6fULL);
  Moments pa, pb;
  for (int i = 0; i < 500; ++i) {
    pa.add(draw(pilot, true));
    pb.add(draw(pilot, false));
  }
  const double ma = std::sqrt(pa.sumsq / static_cast<double>(pa.n));
  const double mb = std::sqrt(pb.sumsq / static_cast<double>(pb.n));
  const double w = (ma + mb) > 0.0 ? std::clamp(ma / (ma + mb), 0.05, 0.95) : 0.5;
  const auto n_near = std::max<std::int64_t>(
      2, static_cast<std::int64_t>(std::llround(w * static_cast<double>(cfg.mc_samples))));
  const auto n_far = std::max<std::int64_t>(2, cfg.mc_samples - n_near);
  Moments a, b;
  for (std::int64_t i = 0; i < n_near; ++i) a.add(draw(stream, true));
  for (std::int64_t i = 0; i < n_far; ++i) b.add(draw(stream, false));
  McValue out;
  out.value = a.mean() + b.mean();
  out.se = std::sqrt(a.se() * a.se() + b.se() * b.se());
  out.flagged = out.se > rel_tol * out.value;
  return out;
}

QuadResult u_lambda_quadrature(const CompensatorConfig& cfg, double height) {
  cfg.validate();
  if (!(height > 0.0)) throw std::invalid_argument("u_lambda_quadrature: height must be > 0");
  const double al = cfg.params.alpha();
  const double h = height;
  auto integrand = [&](double s) {
    if (!(s > 0.0) || s == h || !std::isfinite(s)) return 0.0;
    return green_halfline(al, h, s) * lambda_weight_height(cfg, s);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  QuadResult res;
  double err = 0.0;
  res.value += ts.integrate(integrand, 0.0, h, 1e-10, &err);
  res.abs_error += err;
  res.value += ts.integrate(integrand, h, 2.0 * h, 1e-10, &err);
  res.abs_error += err;
  // s = 2h / v on (0, 1]: algebraic tail becomes an endpoint singularity
  res.value += ts.integrate(
      [&](double v) {
        if (!(v > 0.0)) return 0.0;
        const double s = 2.0 * h / v;
        if (s > 1e100) return 0.0;
        return integrand(s) * s * s / (2.0 * h);
      },
      0.0, 1.0, 1e-10, &err);
  res.abs_error += err;
  if (!(res.abs_error <= 1e-6 * std::abs(res.value) + 1e-300)) {
    throw QuadratureError("u_lambda_quadrature did not converge", res.value, res.abs_error);
  }
  return res;
}

struct UProfile::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

UProfile::UProfile(const CompensatorConfig& cfg, double h_min, double h_max,
                   int points_per_decade) {
  if (!(h_min > 0.0) || !(h_max > h_min) || points_per_decade < 2) {
    throw std::invalid_argument("UProfile: bad grid");
  }
  log_lo_ = std::log(h_min);
  log_hi_ = std::log(h_max);
  const int n = static_cast<int>(std::ceil(std::log10(h_max / h_min) * points_per_decade)) + 1;
  step_ = (log_hi_ - log_lo_) / (n - 1);
  for (int i = 0; i < n; ++i) {
    log_u_.push_back(std::log(u_lambda_quadrature(cfg, std::exp(log_lo_ + i * step_)).value));
  }
  slope_lo_ = (log_u_[1] - log_u_[0]) / step_;
  slope_hi_ = (log_u_[n - 1] - log_u_[n - 2]) / step_;
  spline_ = std::make_shared<const Spline>(Spline{{log_u_.begin(), log_u_.end(), log_lo_, step_}});
}

double UProfile::operator()(double height) const {
  if (!(height > 0.0)) return 0.0;
  const double lh = std::log(height);
  if (lh <= log_lo_) return std::exp(log_u_.front() + slope_lo_ * (lh - log_lo_));
  if (lh >= log_hi_) return std::exp(log_u_.back() + slope_hi_ * (lh - log_hi_));
  return std::exp(spline_->s(lh));
}

QuadResult error_function_quadrature(const StableParams& params, double height) {
  if (!(height > 0.0)) throw std::invalid_argument("error function needs height > 0");
  const StableParams p1(params.alpha(), 1);
  const double a = 0.5 * params.alpha();
  const double y = height;
  const double gy = std::pow(y, a);
  auto g = [a](double s) { return s > 0.0 ? std::pow(s, a) : 0.0; };
  auto integrand = [&](double t) {
    return (g(y + t) + g(y - t) - 2.0 * gy) * radial_density(p1, t).value;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  QuadResult res;
  double err = 0.0;
  using boost::math::quadrature::gauss_kronrod;
  res.value += gauss_kronrod<double, 61>::integrate(integrand, 0.0, y, 15, 1e-11, &err);
  res.abs_error += err;
  res.value += ts.integrate(
      [&](double v) {
        if (!(v > 0.0)) return 0.0;
        const double t = y / v;
        if (t > 1e100) return 0.0;
        return integrand(t) * t * t / y;
      },
      0.0, 1.0, 1e-10, &err);
  res.abs_error += err;
  return res;
}

namespace {

double w_value(const CompensatorConfig& cfg, const UProfile& u, std::span<const double> z,
               bool m_only) {
  const double h = z.back();
  if (!(h > 0.0)) return 0.0;
  const double m = std::pow(h, 0.5 * cfg.params.alpha());
  return m_only ? m : m + u(h);
}

}  // namespace

DriftResult error_drift_check(const CompensatorConfig& cfg, const IncrementLaw& law,
                              const UProfile& u, std::span<const double> x, std::uint64_t seed,
                              int threads) {
  cfg.validate();
  const int d = cfg.params.dim();
  if (law.params() != cfg.params) throw std::invalid_argument("drift: law and config differ");
  if (static_cast<int>(x.size()) != d || !(x.back() > 0.0)) {
    throw std::invalid_argument("drift: x must be an interior point");
  }
  DriftResult r;
  r.y.assign(x.begin(), x.end());
  r.y.back() += cfg.R;
  r.delta = r.y.back();
  const double w0 = w_value(cfg, u, r.y, false);
  r.m_value = martin_halfspace(cfg.params, r.y);
  r.u_value = u(r.delta);
  r.lambda = lambda_weight(cfg, r.y);
  auto chunks =
      parallel_chunks<Moments>(cfg.mc_samples, threads, [&](std::int64_t b, std::int64_t e) {
        Moments m;
        std::array<double, kMaxDim> inc{}, zp{}, zm{};
        const std::size_t du = static_cast<std::size_t>(d);
        for (std::int64_t i = b; i < e; ++i) {
          RngStream rng(seed, "drift", static_cast<std::uint64_t>(i));
          law.sample(rng, std::span<double>(inc.data(), du));
          for (int c = 0; c < d; ++c) {
            zp[c] = r.y[c] + inc[c];
            zm[c] = r.y[c] - inc[c];
          }
          m.add(0.5 * (w_value(cfg, u, std::span<const double>(zp.data(), du), false) +
                       w_value(cfg, u, std::span<const double>(zm.data(), du), false)) -
                w0);
        }
        return m;
      });
  Moments total;
  for (const auto& c : chunks) total.merge(c);
  r.drift = total.mean();
  r.se = total.se();
  r.flagged = !(r.se < 0.5 * std::abs(r.drift));
  return r;
}

McValue error_function_mc(const StableParams& params, const IncrementLaw& law,
                          std::span<const double> y, std::int64_t samples, std::uint64_t seed,
                          int threads) {
  const int d = params.dim();
  const double a = 0.5 * params.alpha();
  const double m0 = martin_halfspace(params, y);
  auto chunks = parallel_chunks<Moments>(samples, threads, [&](std::int64_t b, std::int64_t e) {
    Moments m;
    std::array<double, kMaxDim> inc{};
    for (std::int64_t i = b; i < e; ++i) {
      RngStream rng(seed, "error-function", static_cast<std::uint64_t>(i));
      law.sample(rng, std::span<double>(inc.data(), static_cast<std::size_t>(d)));
      const double hp = y.back() + inc[d - 1];
      const double hm = y.back() - inc[d - 1];
      m.add(0.5 * ((hp > 0.0 ? std::pow(hp, a) : 0.0) + (hm > 0.0 ? std::pow(hm, a) : 0.0)) - m0);
    }
    return m;
  });
  Moments total;
  for (const auto& c : chunks) total.merge(c);
  return {total.mean(), total.se(), false};
}

SupermartingaleTrace supermartingale_trace(const CompensatorConfig& cfg, const IncrementLaw& law,
                                           const UProfile& u, std::span<const double> x,
                                           const TraceOptions& opt, std::uint64_t seed,
                                           int threads) {
  cfg.validate();
  const int d = cfg.params.dim();
  if (law.params() != cfg.params) throw std::invalid_argument("trace: law and config differ");
  if (static_cast<int>(x.size()) != d || !(x.back() > 0.0)) {
    throw std::invalid_argument("trace: x must be an interior point");
  }
  if (opt.n_steps < 1 || opt.reps < 1) throw std::invalid_argument("trace: n_steps, reps >= 1");
  using Key = std::pair<int, int>;
  struct Chunk {
    std::map<Key, Moments> cells;
    std::vector<std::pair<std::int64_t, LoggedPath>> logged;
  };
  const std::size_t du = static_cast<std::size_t>(d);
  auto chunks = parallel_chunks<Chunk>(opt.reps, threads, [&](std::int64_t b, std::int64_t e) {
    Chunk out;
    std::array<double, kMaxDim> pos{}, inc{}, y{};
    for (std::int64_t i = b; i < e; ++i) {
      RngStream rng(seed, "supermartingale", static_cast<std::uint64_t>(i));
      std::copy(x.begin(), x.end(), pos.begin());
      const bool log_it = i < opt.logged_paths;
      LoggedPath lp;
      double lsum = 0.0;
      bool alive = true;
      auto shifted = [&]() {
        std::copy(pos.begin(), pos.begin() + d, y.begin());
        y[d - 1] += cfg.R;
        return std::span<const double>(y.data(), du);
      };
      double w_now = w_value(cfg, u, shifted(), opt.m_only);
      if (log_it) {
        lp.y.push_back(w_now);
        lp.alive.push_back(true);
        lp.lambda_sum.push_back(0.0);
      }
      for (std::int64_t k = 0; k < opt.n_steps; ++k) {
        if (alive) {
          const double lam = lambda_weight(cfg, shifted());
          double r2 = 0.0;
          for (int c = 0; c < d; ++c) r2 += pos[c] * pos[c];
          const Key key{static_cast<int>(std::floor(std::log2(pos[d - 1]))),
                        static_cast<int>(std::floor(0.5 * std::log2(r2)))};
          law.sample(rng, std::span<double>(inc.data(), du));
          for (int c = 0; c < d; ++c) pos[c] += inc[c];
          alive = pos[d - 1] > 0.0;
          const double w_next = alive ? w_value(cfg, u, shifted(), opt.m_only) : 0.0;
          out.cells[key].add(w_next - w_now + cfg.c * lam);
          lsum += lam;
          w_now = w_next;
        }
        if (log_it) {
          lp.y.push_back(w_now + cfg.c * lsum);
          lp.alive.push_back(alive);
          lp.lambda_sum.push_back(lsum);
        }
        if (!alive && !log_it) break;
      }
      if (log_it) out.logged.emplace_back(i, std::move(lp));
    }
    return out;
  });
  std::map<Key, Moments> cells;
  SupermartingaleTrace tr;
  for (auto& c : chunks) {
    for (const auto& [k, m] : c.cells) cells[k].merge(m);
    for (auto& [i, lp] : c.logged) tr.logged.push_back(std::move(lp));
  }
  for (const auto& [k, m] : cells) {
    TraceCell cell;
    cell.delta_bin = k.first;
    cell.norm_bin = k.second;
    cell.count = m.n;
    cell.mean = m.mean();
    cell.se = m.se();
    cell.undersampled = m.n < opt.min_count;
    cell.exceeds = !cell.undersampled && cell.mean > 2.0 * cell.se;
    tr.exceeding_cells += cell.exceeds;
    tr.undersampled_cells += cell.undersampled;
    tr.cells.push_back(cell);
  }
  return tr;
}

}  // namespace stablecone
