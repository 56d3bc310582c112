#include "stablecone/meander.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "stablecone/parallel.hpp"

namespace stablecone {

std::span<const double> MeanderSample::point(std::int64_t path, int j) const {
  const auto stride = static_cast<std::size_t>((k + 1) * dim);
  return {skeleton.data() + static_cast<std::size_t>(path) * stride +
              static_cast<std::size_t>(j * dim),
          static_cast<std::size_t>(dim)};
}

double MeanderSample::acceptance_rate() const {
  return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
}

namespace {

struct Accepted {
  std::vector<std::int64_t> index;
  std::vector<double> skeleton;
  std::vector<double> max_modulus;
};

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

MeanderSample sample_conditioned(const WalkConfig& cfg, std::int64_t n, int k,
                                 std::int64_t target_accepted, int threads) {
  validate(cfg);
  if (n < 1 || n > cfg.horizon) throw std::invalid_argument("meander: need 1 <= n <= horizon");
  if (k < 1 || k > n) throw std::invalid_argument("meander: need 1 <= k <= n");
  if (target_accepted < kMinAccepted) throw std::invalid_argument("meander: target must be >= 100");
  const int d = cfg.cone.dim();
  const double alpha = cfg.law.params().alpha();
  const double scale = std::pow(static_cast<double>(n), -1.0 / alpha);
  std::vector<std::int64_t> marks;
  for (int j = 0; j <= k; ++j) marks.push_back(n * j / k);

  MeanderSample s;
  s.n = n;
  s.k = k;
  s.dim = d;
  s.alpha = alpha;
  for (int j = 0; j <= k; ++j) s.times.push_back(static_cast<double>(j) / k);

  const std::int64_t round = 16 * kPathChunk;
  for (std::int64_t base = 0; base < cfg.reps && s.accepted < target_accepted; base += round) {
    const std::int64_t count = std::min(round, cfg.reps - base);
    auto chunks = parallel_chunks<Accepted>(count, threads, [&](std::int64_t b, std::int64_t e) {
      Accepted out;
      std::array<double, kMaxDim> pos{};
      std::vector<double> skel(static_cast<std::size_t>((k + 1) * d));
      for (std::int64_t local = b; local < e; ++local) {
        const std::int64_t idx = base + local;
        RngStream rng(cfg.seed, kWalkTag, static_cast<std::uint64_t>(idx));
        std::copy(cfg.start.begin(), cfg.start.end(), pos.begin());
        for (int c = 0; c < d; ++c) skel[c] = cfg.start[c] * scale;
        double run_max = norm(cfg.start);
        std::size_t next = 1;
        const std::int64_t tau = detail::walk_path(
            cfg.cone, cfg.law, std::span<double>(pos.data(), static_cast<std::size_t>(d)), rng, n,
            [&](std::int64_t step, std::span<const double> p) {
              run_max = std::max(run_max, norm(p));
              while (next < marks.size() && marks[next] == step) {
                for (int c = 0; c < d; ++c) skel[next * d + c] = p[c] * scale;
                ++next;
              }
            });
        if (tau <= n) continue;
        out.index.push_back(idx);
        out.skeleton.insert(out.skeleton.end(), skel.begin(), skel.end());
        out.max_modulus.push_back(run_max * scale);
      }
      return out;
    });
    for (const auto& c : chunks) {
      for (std::size_t i = 0; i < c.index.size() && s.accepted < target_accepted; ++i) {
        s.path_index.push_back(c.index[i]);
        s.skeleton.insert(s.skeleton.end(), c.skeleton.begin() + i * (k + 1) * d,
                          c.skeleton.begin() + (i + 1) * (k + 1) * d);
        s.max_modulus.push_back(c.max_modulus[i]);
        ++s.accepted;
        s.proposed = c.index[i] + 1;
      }
    }
    if (s.accepted < target_accepted) s.proposed = base + count;
  }
  s.partial = s.accepted < target_accepted;
  return s;
}

std::vector<double> endpoint_radii(const MeanderSample& s) {
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(s.accepted));
  for (std::int64_t i = 0; i < s.accepted; ++i) r.push_back(norm(s.point(i, s.k)));
  return r;
}

std::vector<double> endpoint_last_coord(const MeanderSample& s) {
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(s.accepted));
  for (std::int64_t i = 0; i < s.accepted; ++i) r.push_back(s.point(i, s.k).back());
  return r;
}

EndpointStats endpoint_stats(const MeanderSample& s, double theta, int angle_bins, int bootstrap,
                             std::uint64_t seed) {
  if (s.accepted < kMinAccepted) throw std::invalid_argument("endpoint_stats needs >= 100 paths");
  EndpointStats st;
  st.probs = {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};
  const auto radii = endpoint_radii(s);
  const auto last = endpoint_last_coord(s);
  for (double p : st.probs) {
    st.radius_quantiles.push_back(quantile(radii, p));
    st.last_coord_quantiles.push_back(quantile(last, p));
    st.max_modulus_quantiles.push_back(quantile(s.max_modulus, p));
  }
  for (int b = 0; b <= angle_bins; ++b) st.angle_edges.push_back(theta * b / angle_bins);
  st.angle_counts.assign(static_cast<std::size_t>(angle_bins), 0);
  for (std::int64_t i = 0; i < s.accepted; ++i) {
    const double psi = axis_angle(s.point(i, s.k));
    const int bin = std::clamp(static_cast<int>(psi / theta * angle_bins), 0, angle_bins - 1);
    ++st.angle_counts[static_cast<std::size_t>(bin)];
  }
  st.radius_median = quantile(radii, 0.5);
  std::vector<double> medians;
  std::vector<double> resample(radii.size());
  for (int b = 0; b < bootstrap; ++b) {
    RngStream rng(seed, "bootstrap", static_cast<std::uint64_t>(b));
    for (auto& v : resample) v = radii[rng() % radii.size()];
    medians.push_back(quantile(resample, 0.5));
  }
  if (!medians.empty()) {
    st.radius_median_lo = quantile(medians, 0.025);
    st.radius_median_hi = quantile(medians, 0.975);
  }
  return st;
}

InvarianceResult compare_meanders(MeanderSample a, MeanderSample b) {
  InvarianceResult r;
  r.partial = a.partial || b.partial;
  r.radius = ks_two_sample(endpoint_radii(a), endpoint_radii(b));
  r.last_coord = ks_two_sample(endpoint_last_coord(a), endpoint_last_coord(b));
  r.max_modulus = ks_two_sample(a.max_modulus, b.max_modulus);
  const double floor = r.p_floor / 2.0;
  r.pass = r.radius.p_value > floor && r.last_coord.p_value > floor;
  r.a = std::move(a);
  r.b = std::move(b);
  return r;
}

InvarianceResult invariance_check(const WalkConfig& cfg_a, const WalkConfig& cfg_b, std::int64_t n,
                                  std::int64_t target, int threads) {
  if (!(cfg_a.cone == cfg_b.cone) || cfg_a.start != cfg_b.start) {
    throw std::invalid_argument("invariance_check: cone and start must match");
  }
  auto a = sample_conditioned(cfg_a, n, kSkeletonPoints, target, threads);
  auto b = sample_conditioned(cfg_b, n, kSkeletonPoints, target, threads);
  return compare_meanders(std::move(a), std::move(b));
}

std::vector<double> default_tightness_grid() {
  std::vector<double> g;
  for (int i = -2; i <= 10; ++i) g.push_back(std::pow(2.0, 0.5 * i));
  return g;
}

TightnessResult tightness_check(const MeanderSample& s, std::span<const double> a_grid,
                                double beta_hat, double fit_lo, double fit_hi) {
  if (s.accepted < kMinAccepted) throw std::invalid_argument("tightness_check needs >= 100 paths");
  for (std::size_t i = 1; i < a_grid.size(); ++i) {
    if (!(a_grid[i] > a_grid[i - 1])) throw std::invalid_argument("A grid must increase");
  }
  TightnessResult t;
  t.target_slope = -(s.alpha - beta_hat);
  const double N = static_cast<double>(s.accepted);
  for (double A : a_grid) {
    const auto ex = std::count_if(s.max_modulus.begin(), s.max_modulus.end(),
                                  [A](double m) { return m > A; });
    const double p = static_cast<double>(ex) / N;
    t.rows.push_back({A, ex, p, 0.0, ex < kMinExceedances});
    t.constant = std::max(t.constant, p * std::pow(A, s.alpha - beta_hat));
  }
  for (auto& row : t.rows) row.bound = t.constant * std::pow(row.A, beta_hat - s.alpha);

  std::vector<double> x, y, p;
  for (const auto& row : t.rows) {
    if (row.A < fit_lo || row.A > fit_hi || row.flagged || row.p >= 1.0) continue;
    x.push_back(std::log(row.A));
    y.push_back(std::log(row.p));
    p.push_back(row.p);
  }
  if (x.size() < 2) {
    t.slope = std::nan("");
    t.slope_se = std::nan("");
    return t;
  }
  // nested events: cov(log p_i, log p_j) = (1 - p_i) / (N p_i) for A_i <= A_j
  const std::size_t m = x.size();
  std::vector<double> cov(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double q = p[std::min(i, j)];
      cov[i * m + j] = (1.0 - q) / (N * q);
    }
  }
  const auto fit = fit_line(x, y, cov);
  t.slope = fit.slope;
  t.slope_se = fit.slope_se;
  return t;
}

}  // namespace stablecone
