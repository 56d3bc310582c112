#include "stablecone/martin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stablecone/parallel.hpp"

namespace stablecone {

double eval_martin_halfspace(const StableParams& params, std::span<const double> x) {
  const double xd = x.back();
  return xd > 0.0 ? std::pow(xd, 0.5 * params.alpha()) : 0.0;
}

namespace {

std::vector<std::size_t> rows_with_survivors(const SurvivalTable& t, std::size_t first) {
  std::vector<std::size_t> rows;
  for (std::size_t i = first; i < t.horizons.size(); ++i) {
    if (t.survivors[i] > 0 && t.survivors[i] < t.reps) rows.push_back(i);
  }
  return rows;
}

std::vector<double> sub_covariance(const std::vector<double>& cov, std::size_t n,
                                   std::span<const std::size_t> keep) {
  std::vector<double> out(keep.size() * keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) out[a * keep.size() + b] = cov[keep[a] * n + keep[b]];
  }
  return out;
}

}  // namespace

BetaEstimate beta_from_survival(const SurvivalTable& survival, double alpha) {
  const std::size_t n_all = survival.horizons.size();
  const auto drop = static_cast<std::size_t>(std::floor(kBetaDropFraction * static_cast<double>(n_all)));
  const auto rows = rows_with_survivors(survival, drop);
  if (rows.size() < 3) throw std::invalid_argument("beta fit needs >= 3 horizons with survivors");
  std::vector<double> x, y;
  for (auto i : rows) {
    x.push_back(std::log(static_cast<double>(survival.horizons[i])));
    y.push_back(std::log(survival.estimate[i]));
  }
  const auto cov = survival.log_covariance(rows);
  const auto fit = fit_line(x, y, cov);

  BetaEstimate b;
  b.slope = fit.slope;
  b.slope_se = fit.slope_se;
  b.beta_hat = -fit.slope * alpha;
  b.se = fit.slope_se * alpha;
  b.widened = survival.survivors.back() < kBetaMinTopSurvivors;
  if (b.widened) b.se *= 2.0;
  b.ci_lo = b.beta_hat - kZ95 * b.se;
  b.ci_hi = b.beta_hat + kZ95 * b.se;
  for (auto i : rows) b.fit_horizons.push_back(survival.horizons[i]);
  b.residuals = fit.residuals;

  // Trend of the residuals over the top decade, with the same covariance.
  const double n_max = static_cast<double>(survival.horizons[rows.back()]);
  std::vector<std::size_t> top;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (10.0 * static_cast<double>(survival.horizons[rows[k]]) >= n_max) top.push_back(k);
  }
  if (top.size() >= 3) {
    std::vector<double> tx, ty;
    for (auto k : top) {
      tx.push_back(x[k]);
      ty.push_back(fit.residuals[k]);
    }
    const auto tcov = sub_covariance(cov, rows.size(), top);
    const auto tfit = fit_line(tx, ty, tcov);
    const double z = tfit.slope_se > 0.0 ? std::abs(tfit.slope) / tfit.slope_se : 0.0;
    b.trend_p_value = std::erfc(z / std::sqrt(2.0));
  }
  return b;
}

BetaEstimate estimate_beta(const ConeSpec& cone, const IncrementLaw& law,
                           std::span<const std::int64_t> horizons, std::int64_t reps,
                           std::uint64_t seed, int threads) {
  if (horizons.size() < 5) throw std::invalid_argument("estimate_beta needs >= 5 horizons");
  if (reps < 100000) throw std::invalid_argument("estimate_beta needs reps >= 1e5");
  WalkConfig cfg{cone, law, unit_at_angle(cone.dim(), 0.0), horizons.back(), reps, seed};
  const auto table = survival_curve(cfg, horizons, threads);
  return beta_from_survival(table, law.params().alpha());
}

RatioEstimate ratio_from_coupled(const CoupledSurvival& run, std::size_t s) {
  const auto& ref = run.tables.at(0);
  const auto& tab = run.tables.at(s);
  const double reps = static_cast<double>(ref.reps);
  RatioEstimate r;
  for (std::size_t h = 0; h < ref.horizons.size(); ++h) {
    if (ref.survivors[h] == 0 || tab.survivors[h] == 0) continue;
    const double pe = ref.estimate[h];
    const double px = tab.estimate[h];
    const double pj = static_cast<double>(run.joint[s][h]) / reps;
    const double var_log =
        ((1.0 - px) / px + (1.0 - pe) / pe - 2.0 * (pj - px * pe) / (px * pe)) / reps;
    const double ratio = px / pe;
    r.series.push_back({ref.horizons[h], ratio, ratio * std::sqrt(std::max(0.0, var_log))});
  }
  if (r.series.empty()) throw std::invalid_argument("martin ratio: no horizon with survivors");
  const auto& last = r.series.back();
  if (r.series.size() >= 2) {
    const auto& prev = r.series[r.series.size() - 2];
    r.value = 0.5 * (last.ratio + prev.ratio);
    r.se = std::max(last.se, prev.se);
    r.non_plateau = std::abs(last.ratio - prev.ratio) >
                    kZ95 * std::sqrt(last.se * last.se + prev.se * prev.se);
  } else {
    r.value = last.ratio;
    r.se = last.se;
  }
  r.ci_lo = r.value - kZ95 * r.se;
  r.ci_hi = r.value + kZ95 * r.se;
  return r;
}

RatioRun estimate_martin_ratio(const ConeSpec& cone, const IncrementLaw& law,
                               std::span<const double> x, std::span<const std::int64_t> horizons,
                               std::int64_t reps, std::uint64_t seed, int threads,
                               double start_scale) {
  if (!(start_scale > 0.0)) throw std::invalid_argument("start_scale must be positive");
  if (!contains(cone, x)) throw std::invalid_argument("martin ratio: x is not in the cone");
  Vec e = unit_at_angle(cone.dim(), 0.0);
  Vec lx(x.begin(), x.end());
  for (auto& v : e) v *= start_scale;
  for (auto& v : lx) v *= start_scale;
  RatioRun out;
  out.survival = coupled_survival(cone, law, {e, lx}, horizons, reps, seed, threads);
  out.ratio = ratio_from_coupled(out.survival, 1);
  return out;
}

MartinEstimate estimate_martin_profile(const ConeSpec& cone, const IncrementLaw& law,
                                       std::span<const std::int64_t> horizons, std::int64_t reps,
                                       std::uint64_t seed, int threads, double start_scale,
                                       int n_angles) {
  if (n_angles < 2) throw std::invalid_argument("profile needs >= 2 angles");
  if (!(start_scale > 0.0)) throw std::invalid_argument("start_scale must be positive");
  const int d = cone.dim();
  std::vector<Vec> starts;
  std::vector<double> angles;
  for (int j = 0; j < n_angles; ++j) {
    const double psi = cone.theta() * static_cast<double>(j) / static_cast<double>(n_angles);
    angles.push_back(psi);
    Vec u = unit_at_angle(d, psi);
    for (auto& v : u) v *= start_scale;
    starts.push_back(std::move(u));
  }
  const auto run = coupled_survival(cone, law, starts, horizons, reps, seed, threads);
  MartinEstimate est{cone, law.params(), beta_from_survival(run.tables[0], law.params().alpha()),
                     angles, {}, {}, {}, {}, seed, reps, start_scale};
  est.values.push_back(1.0);
  est.ci_lo.push_back(1.0);
  est.ci_hi.push_back(1.0);
  est.non_plateau.push_back(false);
  for (int j = 1; j < n_angles; ++j) {
    double v = 0.0, lo = 0.0, hi = 0.0;
    bool flag = true;
    try {
      const auto r = ratio_from_coupled(run, static_cast<std::size_t>(j));
      v = r.value;
      lo = std::max(0.0, r.ci_lo);
      hi = r.ci_hi;
      flag = r.non_plateau;
    } catch (const std::invalid_argument&) {
      // no survivors from this start: the kernel is below resolution
    }
    est.values.push_back(v);
    est.ci_lo.push_back(lo);
    est.ci_hi.push_back(hi);
    est.non_plateau.push_back(flag);
  }
  return est;
}

double MartinEstimate::eval(std::span<const double> x) const {
  if (!contains(cone, x)) return 0.0;
  const double psi = axis_angle(x);
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double step = angles.size() > 1 ? angles[1] - angles[0] : cone.theta();
  const auto j = std::min(static_cast<std::size_t>(psi / step), angles.size() - 1);
  const double left = values[j];
  const double right = j + 1 < values.size() ? values[j + 1] : 0.0;
  const double t = (psi - angles[j]) / step;
  const double prof = std::max(0.0, left + t * (right - left));
  return std::pow(r2, 0.5 * beta.beta_hat) * prof;
}

MeanValueResidual check_mean_value(const ConeSpec& cone, const StableParams& params,
                                   const PointFunction& m_eval, std::span<const double> x,
                                   double r, std::int64_t reps, std::uint64_t seed, int threads) {
  if (!(r > 0.0) || !(r < dist_to_boundary(cone, x))) {
    throw std::invalid_argument("check_mean_value: need 0 < r < delta(x)");
  }
  if (reps < 2) throw std::invalid_argument("check_mean_value: reps must be >= 2");
  const int d = cone.dim();
  const double m_x = m_eval(x);
  auto chunks = parallel_chunks<Moments>(reps, threads, [&](std::int64_t b, std::int64_t e) {
    Moments m;
    std::array<double, kMaxDim> zero{};
    std::array<double, kMaxDim> w{};
    const std::span<double> ws(w.data(), static_cast<std::size_t>(d));
    for (std::int64_t i = b; i < e; ++i) {
      RngStream rng(seed, "mean-value", static_cast<std::uint64_t>(i));
      sample_ball_exit(params, r, std::span<const double>(zero.data(), static_cast<std::size_t>(d)),
                       rng, ws);
      for (int c = 0; c < d; ++c) ws[c] += x[c];
      m.add(m_eval(ws) - m_x);
    }
    return m;
  });
  Moments total;
  for (const auto& c : chunks) total.merge(c);
  return {total.mean(), total.se(), m_x};
}

EnvelopeStats check_michalik_envelope(const ConeSpec& cone, const StableParams& params,
                                      const PointFunction& m_eval, double beta,
                                      const std::vector<Vec>& grid) {
  if (grid.empty()) throw std::invalid_argument("envelope grid is empty");
  const double a2 = 0.5 * params.alpha();
  EnvelopeStats s;
  for (const auto& x : grid) {
    const double r = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    const double env = std::pow(r, beta - a2) * std::pow(dist_to_boundary(cone, x), a2);
    s.ratios.push_back(m_eval(x) / env);
  }
  const auto [mn, mx] = std::minmax_element(s.ratios.begin(), s.ratios.end());
  s.min_ratio = *mn;
  s.max_ratio = *mx;
  return s;
}

EnvelopeStats check_michalik_envelope(const MartinEstimate& estimate, const std::vector<Vec>& grid) {
  return check_michalik_envelope(
      estimate.cone, estimate.params,
      [&](std::span<const double> x) { return estimate.eval(x); }, estimate.beta.beta_hat, grid);
}

}  // namespace stablecone
