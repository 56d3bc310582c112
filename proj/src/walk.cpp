#include "stablecone/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stablecone/parallel.hpp"

namespace stablecone {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::span<double> as_span(std::array<double, kMaxDim>& a, int d) {
  return {a.data(), static_cast<std::size_t>(d)};
}

}  // namespace

void validate(const WalkConfig& cfg) {
  const int d = cfg.cone.dim();
  if (cfg.law.dim() != d) throw std::invalid_argument("walk: law and cone dimensions differ");
  if (static_cast<int>(cfg.start.size()) != d) {
    throw std::invalid_argument("walk: start point has the wrong dimension");
  }
  if (!contains(cfg.cone, cfg.start)) throw std::invalid_argument("walk: start is not in the cone");
  if (cfg.horizon < 1) throw std::invalid_argument("walk: horizon must be >= 1");
  if (cfg.reps < 1) throw std::invalid_argument("walk: reps must be >= 1");
}

ExitRecord run_walk_exit(const WalkConfig& cfg, std::int64_t path_index) {
  RngStream rng(cfg.seed, kWalkTag, static_cast<std::uint64_t>(path_index));
  return run_walk_exit(cfg, path_index, rng);
}

ExitRecord run_walk_exit(const WalkConfig& cfg, std::int64_t path_index, RngStream& stream) {
  validate(cfg);
  const int d = cfg.cone.dim();
  std::array<double, kMaxDim> pos{};
  std::copy(cfg.start.begin(), cfg.start.end(), pos.begin());
  double running_max = norm(cfg.start);
  const std::int64_t tau =
      detail::walk_path(cfg.cone, cfg.law, as_span(pos, d), stream, cfg.horizon,
                        [&](std::int64_t, std::span<const double> p) {
                          running_max = std::max(running_max, norm(p));
                        });
  ExitRecord rec;
  rec.path_index = path_index;
  rec.tau = tau;
  rec.censored = tau > cfg.horizon;
  rec.final_position.assign(pos.begin(), pos.begin() + d);
  rec.running_max = running_max;
  return rec;
}

void check_horizons(std::span<const std::int64_t> horizons, std::int64_t max_horizon) {
  if (horizons.empty()) throw std::invalid_argument("horizon grid is empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1 || horizons[i] > max_horizon) {
      throw std::invalid_argument("horizon " + std::to_string(horizons[i]) +
                                  " outside [1, " + std::to_string(max_horizon) + "]");
    }
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw std::invalid_argument("horizon grid must be strictly increasing");
    }
  }
}

std::vector<std::int64_t> geometric_horizons(int lo_exp, int hi_exp, std::int64_t base) {
  std::vector<std::int64_t> out;
  std::int64_t v = 1;
  for (int k = 0; k <= hi_exp; ++k) {
    if (k >= lo_exp) out.push_back(v);
    v *= base;
  }
  return out;
}

std::vector<double> SurvivalTable::log_covariance(std::span<const std::size_t> rows) const {
  const std::size_t n = rows.size();
  std::vector<double> cov(n * n);
  const double reps_d = static_cast<double>(reps);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t i = std::min(rows[a], rows[b]);
      const double p = estimate[i];
      cov[a * n + b] = (1.0 - p) / (reps_d * p);
    }
  }
  return cov;
}

namespace {

struct PassChunk {
  std::vector<std::int64_t> survivors;
  std::vector<Moments> values;
  std::vector<Moments> diffs;
};

SurvivalTable make_table(std::span<const std::int64_t> horizons,
                         const std::vector<std::int64_t>& survivors, std::int64_t reps) {
  SurvivalTable t;
  t.horizons.assign(horizons.begin(), horizons.end());
  t.survivors = survivors;
  t.reps = reps;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto ci = wilson_interval(survivors[i], reps);
    t.estimate.push_back(static_cast<double>(survivors[i]) / static_cast<double>(reps));
    t.ci_lo.push_back(ci.lo);
    t.ci_hi.push_back(ci.hi);
    t.degenerate.push_back(survivors[i] == 0);
  }
  return t;
}

SurvivalAndHarmonic shared_pass(const WalkConfig& cfg, std::span<const std::int64_t> horizons,
                                std::span<const std::int64_t> m_grid, const PointFunction* m_eval,
                                int threads) {
  validate(cfg);
  if (!horizons.empty()) check_horizons(horizons, cfg.horizon);
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] < 0 || m_grid[i] > cfg.horizon || (i > 0 && m_grid[i] <= m_grid[i - 1])) {
      throw std::invalid_argument("m grid must be strictly increasing within [0, horizon]");
    }
  }
  const int d = cfg.cone.dim();
  std::int64_t run_to = 0;
  if (!horizons.empty()) run_to = horizons.back();
  if (!m_grid.empty()) run_to = std::max(run_to, m_grid.back());
  const double m_at_start = (m_eval && !m_grid.empty()) ? (*m_eval)(cfg.start) : 0.0;

  auto chunks = parallel_chunks<PassChunk>(cfg.reps, threads, [&](std::int64_t b, std::int64_t e) {
    PassChunk out;
    out.survivors.assign(horizons.size(), 0);
    out.values.resize(m_grid.size());
    out.diffs.resize(m_grid.empty() ? 0 : m_grid.size() - 1);
    std::vector<double> scores(m_grid.size());
    std::array<double, kMaxDim> pos{};
    for (std::int64_t idx = b; idx < e; ++idx) {
      RngStream rng(cfg.seed, kWalkTag, static_cast<std::uint64_t>(idx));
      std::copy(cfg.start.begin(), cfg.start.end(), pos.begin());
      std::fill(scores.begin(), scores.end(), 0.0);
      std::size_t next_m = 0;
      if (!m_grid.empty() && m_grid[0] == 0) {
        scores[0] = m_at_start;
        next_m = 1;
      }
      const std::int64_t tau = detail::walk_path(
          cfg.cone, cfg.law, as_span(pos, d), rng, run_to,
          [&](std::int64_t k, std::span<const double> p) {
            if (next_m < m_grid.size() && m_grid[next_m] == k) {
              scores[next_m] = (*m_eval)(p);
              ++next_m;
            }
          });
      for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (tau > horizons[i]) ++out.survivors[i];
      }
      for (std::size_t j = 0; j < m_grid.size(); ++j) out.values[j].add(scores[j]);
      for (std::size_t j = 0; j + 1 < m_grid.size(); ++j) out.diffs[j].add(scores[j + 1] - scores[j]);
    }
    return out;
  });

  std::vector<std::int64_t> survivors(horizons.size(), 0);
  std::vector<Moments> values(m_grid.size());
  std::vector<Moments> diffs(m_grid.empty() ? 0 : m_grid.size() - 1);
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i] += c.survivors[i];
    for (std::size_t j = 0; j < values.size(); ++j) values[j].merge(c.values[j]);
    for (std::size_t j = 0; j < diffs.size(); ++j) diffs[j].merge(c.diffs[j]);
  }

  SurvivalAndHarmonic out;
  out.survival = make_table(horizons, survivors, cfg.reps);
  HarmonicEstimate& h = out.harmonic;
  h.x = cfg.start;
  h.m_grid.assign(m_grid.begin(), m_grid.end());
  for (const auto& v : values) {
    h.v_hat.push_back(v.mean());
    h.se.push_back(v.se());
    h.ci_lo.push_back(std::max(0.0, v.mean() - kZ95 * v.se()));
    h.ci_hi.push_back(v.mean() + kZ95 * v.se());
  }
  for (const auto& dmo : diffs) {
    h.step_diff.push_back(dmo.mean());
    h.step_diff_se.push_back(dmo.se());
  }
  h.plateau = !diffs.empty() &&
              std::abs(h.step_diff.back()) <= kZ95 * h.step_diff_se.back();
  return out;
}

}  // namespace

SurvivalTable survival_curve(const WalkConfig& cfg, std::span<const std::int64_t> horizons,
                             int threads) {
  check_horizons(horizons, cfg.horizon);
  return shared_pass(cfg, horizons, {}, nullptr, threads).survival;
}

HarmonicEstimate estimate_V(const WalkConfig& cfg, std::span<const std::int64_t> m_grid,
                            const PointFunction& m_eval, int threads) {
  if (m_grid.empty()) throw std::invalid_argument("m grid is empty");
  return shared_pass(cfg, {}, m_grid, &m_eval, threads).harmonic;
}

SurvivalAndHarmonic survival_and_V(const WalkConfig& cfg, std::span<const std::int64_t> horizons,
                                   std::span<const std::int64_t> m_grid,
                                   const PointFunction& m_eval, int threads) {
  if (m_grid.empty()) throw std::invalid_argument("m grid is empty");
  check_horizons(horizons, cfg.horizon);
  return shared_pass(cfg, horizons, m_grid, &m_eval, threads);
}

CoupledSurvival coupled_survival(const ConeSpec& cone, const IncrementLaw& law,
                                 const std::vector<Vec>& starts,
                                 std::span<const std::int64_t> horizons, std::int64_t reps,
                                 std::uint64_t seed, int threads) {
  if (starts.empty()) throw std::invalid_argument("coupled_survival: no starts");
  if (reps < 1) throw std::invalid_argument("coupled_survival: reps must be >= 1");
  check_horizons(horizons, horizons.empty() ? 1 : horizons.back());
  const int d = cone.dim();
  if (law.dim() != d) throw std::invalid_argument("coupled_survival: law and cone dimensions differ");
  for (const auto& s : starts) {
    if (static_cast<int>(s.size()) != d || !contains(cone, s)) {
      throw std::invalid_argument("coupled_survival: every start must be a point of the cone");
    }
  }
  const std::size_t ns = starts.size();
  const std::size_t nh = horizons.size();
  const std::int64_t run_to = horizons.back();
  struct Counts {
    std::vector<std::int64_t> alive;  // ns x nh
    std::vector<std::int64_t> joint;  // ns x nh
  };
  auto chunks = parallel_chunks<Counts>(reps, threads, [&](std::int64_t b, std::int64_t e) {
    Counts out;
    out.alive.assign(ns * nh, 0);
    out.joint.assign(ns * nh, 0);
    std::vector<double> pos(ns * d);
    std::vector<std::int64_t> tau(ns);
    std::array<double, kMaxDim> inc{};
    const std::span<double> step(inc.data(), static_cast<std::size_t>(d));
    for (std::int64_t idx = b; idx < e; ++idx) {
      RngStream rng(seed, kWalkTag, static_cast<std::uint64_t>(idx));
      for (std::size_t s = 0; s < ns; ++s) {
        std::copy(starts[s].begin(), starts[s].end(), pos.begin() + s * d);
        tau[s] = run_to + 1;
      }
      std::size_t n_alive = ns;
      for (std::int64_t k = 1; k <= run_to && n_alive > 0; ++k) {
        law.sample(rng, step);
        for (std::size_t s = 0; s < ns; ++s) {
          if (tau[s] <= run_to) continue;
          double* p = pos.data() + s * d;
          for (int c = 0; c < d; ++c) p[c] += step[c];
          if (!contains(cone, std::span<const double>(p, static_cast<std::size_t>(d)))) {
            tau[s] = k;
            --n_alive;
          }
        }
      }
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t h = 0; h < nh; ++h) {
          if (tau[s] > horizons[h]) {
            ++out.alive[s * nh + h];
            if (tau[0] > horizons[h]) ++out.joint[s * nh + h];
          }
        }
      }
    }
    return out;
  });
  std::vector<std::int64_t> alive(ns * nh, 0), joint(ns * nh, 0);
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < alive.size(); ++i) {
      alive[i] += c.alive[i];
      joint[i] += c.joint[i];
    }
  }
  CoupledSurvival out;
  out.starts = starts;
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<std::int64_t> surv(alive.begin() + s * nh, alive.begin() + (s + 1) * nh);
    out.tables.push_back(make_table(horizons, surv, reps));
    out.joint.emplace_back(joint.begin() + s * nh, joint.begin() + (s + 1) * nh);
  }
  return out;
}

HarmonicityResidual harmonicity_residual(const WalkConfig& cfg, std::span<const double> x,
                                         std::int64_t m_star, std::int64_t inner_reps,
                                         std::int64_t outer_reps, const PointFunction& m_eval,
                                         int threads, std::optional<BallExitKernel> kernel) {
  if (m_star < 0 || inner_reps < 1 || outer_reps < 2) {
    throw std::invalid_argument("harmonicity_residual: need m_star >= 0, inner >= 1, outer >= 2");
  }
  WalkConfig direct = cfg;
  direct.start.assign(x.begin(), x.end());
  direct.horizon = std::max<std::int64_t>(m_star, 1);
  direct.seed = substream_key(cfg.seed, "harmonic-direct", 0);
  validate(direct);
  if (kernel && !(kernel->radius < dist_to_boundary(cfg.cone, x))) {
    throw std::invalid_argument("harmonicity_residual: ball kernel must fit inside the cone");
  }
  const std::int64_t m_grid[] = {m_star};
  const auto v = estimate_V(direct, m_grid, m_eval, threads);

  const int d = cfg.cone.dim();
  struct OuterChunk {
    Moments outer;
    Moments inner_var;
  };
  auto chunks = parallel_chunks<OuterChunk>(
      outer_reps, threads,
      [&](std::int64_t b, std::int64_t e) {
        OuterChunk out;
        std::array<double, kMaxDim> succ{};
        std::array<double, kMaxDim> pos{};
        for (std::int64_t i = b; i < e; ++i) {
          RngStream rng(cfg.seed, "harmonic-outer", static_cast<std::uint64_t>(i));
          auto s = as_span(succ, d);
          if (kernel) {
            std::array<double, kMaxDim> zero{};
            sample_ball_exit(cfg.law.params(), kernel->radius, as_span(zero, d), rng, s);
            for (int c = 0; c < d; ++c) s[c] += x[c];
          } else {
            cfg.law.sample(rng, s);
            for (int c = 0; c < d; ++c) s[c] += x[c];
          }
          if (!contains(cfg.cone, s)) {
            out.outer.add(0.0);
            out.inner_var.add(0.0);
            continue;
          }
          Moments inner;
          for (std::int64_t j = 0; j < inner_reps; ++j) {
            RngStream child = rng.split(static_cast<std::uint64_t>(j));
            std::copy(s.begin(), s.end(), pos.begin());
            const std::int64_t tau =
                detail::walk_path(cfg.cone, cfg.law, as_span(pos, d), child, m_star,
                                  [](std::int64_t, std::span<const double>) {});
            inner.add(tau > m_star ? m_eval(as_span(pos, d)) : 0.0);
          }
          out.outer.add(inner.mean());
          out.inner_var.add(inner.variance() / static_cast<double>(inner_reps));
        }
        return out;
      },
      256);
  Moments outer, inner_var;
  for (const auto& c : chunks) {
    outer.merge(c.outer);
    inner_var.merge(c.inner_var);
  }
  HarmonicityResidual r;
  r.v_hat = v.v_hat[0];
  r.v_se = v.se[0];
  r.successor_mean = outer.mean();
  r.successor_se = outer.se();
  r.residual = r.v_hat - r.successor_mean;
  r.se = std::sqrt(r.v_se * r.v_se + r.successor_se * r.successor_se);
  const double total = outer.variance();
  r.inner_variance_share = total > 0.0 ? inner_var.mean() / total : 0.0;
  r.flagged = r.inner_variance_share > 0.9;
  return r;
}

KappaEstimate estimate_kappa(const SurvivalTable& survival, double v_hat, double v_se,
                             double beta_hat, double alpha) {
  if (!(v_hat > 0.0)) throw std::invalid_argument("estimate_kappa: V must be positive");
  KappaEstimate k;
  const double expo = beta_hat / alpha;
  const std::int64_t n_max = survival.horizons.back();
  std::vector<double> top;
  double top_var_max = 0.0;
  for (std::size_t i = 0; i < survival.horizons.size(); ++i) {
    if (survival.survivors[i] == 0) continue;
    const double n = static_cast<double>(survival.horizons[i]);
    const double p = survival.estimate[i];
    const double kappa = std::pow(n, expo) * p / v_hat;
    const double rel_var = (1.0 - p) / (static_cast<double>(survival.reps) * p) +
                           (v_se / v_hat) * (v_se / v_hat);
    const double se = kappa * std::sqrt(rel_var);
    k.series.push_back({survival.horizons[i], kappa, kappa - kZ95 * se, kappa + kZ95 * se});
    if (10 * survival.horizons[i] >= n_max) {
      top.push_back(kappa);
      top_var_max = std::max(top_var_max, se * se);
    }
  }
  if (top.empty()) throw std::invalid_argument("estimate_kappa: no survivors in the top decade");
  double sum = 0.0;
  for (double v : top) sum += v;
  k.plateau = sum / static_cast<double>(top.size());
  // positively correlated points: the mean's variance is at most the largest one
  k.plateau_se = std::sqrt(top_var_max);
  const auto [mn, mx] = std::minmax_element(top.begin(), top.end());
  k.max_rel_drift = (*mx - *mn) / k.plateau;
  k.non_plateau = k.max_rel_drift > kKappaDriftLimit;
  return k;
}

double survival_upper_bound_statistic(const SurvivalTable& survival, double beta_hat,
                                      double alpha, double w_value) {
  if (!(w_value > 0.0)) throw std::invalid_argument("upper bound statistic needs W > 0");
  double sup = 0.0;
  for (std::size_t i = 0; i < survival.horizons.size(); ++i) {
    const double n = static_cast<double>(survival.horizons[i]);
    sup = std::max(sup, std::pow(n, beta_hat / alpha) * survival.estimate[i] / w_value);
  }
  return sup;
}

}  // namespace stablecone
