#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xrsim/common.hpp"
#include "xrsim/nelder_mead.hpp"
#include "xrsim/rng.hpp"

namespace xrsim {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Linear ballistic accumulator race. Start points are uniform on [0, A],
// drifts are drawn once per trial from N(v_i, s), and the first accumulator
// to reach the shared threshold b = A + k_gap wins. The alternative
// accumulator's drift and the drift SD are fixed for identifiability.
struct LbaParams {
  double a_start = 0.5;
  double k_gap = 0.5;
  double v_commit_base = 3.0;
  double beta_id = 0.0;        // additive drift effect per difficulty bit
  double beta_pressure = 0.0;  // additive threshold-gap effect under pressure
  std::vector<double> t0_s = {0.2};  // non-decision offset per covariate cell
  double v_alt = 1.0;                // fixed
  double s_drift = 1.0;              // fixed

  double threshold(bool pressured) const {
    return a_start + k_gap + (pressured ? beta_pressure : 0.0);
  }
  double v_commit(double id_bits) const { return v_commit_base + beta_id * id_bits; }
};

inline void validate(const LbaParams& p) {
  if (!(p.a_start > 0.0) || !(p.k_gap > 0.0))
    throw std::invalid_argument("lba: start range and threshold gap must be positive");
  if (!(p.s_drift > 0.0)) throw std::invalid_argument("lba: drift SD must be positive");
  if (p.t0_s.empty()) throw std::invalid_argument("lba: at least one t0 cell");
  for (double t0 : p.t0_s)
    if (!(t0 >= 0.0)) throw std::invalid_argument("lba: t0 must be non-negative");
  if (!(p.k_gap + p.beta_pressure > 0.0))
    throw std::invalid_argument("lba: pressured threshold must stay above the start range");
}

struct LbaCovariates {
  double id_bits = 0.0;
  bool pressured = false;
  int t0_cell = 0;
};

// Single-accumulator distribution of threshold crossing times, closed form
// for uniform start and Gaussian drift.
inline double lba_cdf(double t, double a, double b, double v, double s) {
  if (t <= 0.0) return 0.0;
  const double ts = t * s;
  const double z1 = (b - a - t * v) / ts;
  const double z2 = (b - t * v) / ts;
  const double value = 1.0 + ((b - a - t * v) / a) * normal_cdf(z1) -
                       ((b - t * v) / a) * normal_cdf(z2) +
                       (ts / a) * (normal_pdf(z1) - normal_pdf(z2));
  return std::clamp(value, 0.0, 1.0);
}

inline double lba_pdf(double t, double a, double b, double v, double s) {
  if (t <= 0.0) return 0.0;
  const double ts = t * s;
  const double z1 = (b - a - t * v) / ts;
  const double z2 = (b - t * v) / ts;
  // v * (Phi(z2) - Phi(z1)) in survivor form; the naive difference of CDFs
  // absorbs the tail densities and truncates the left edge to exact zero.
  const double value =
      (v * (normal_sf(z1) - normal_sf(z2)) + s * (normal_pdf(z1) - normal_pdf(z2))) / a;
  return std::max(value, 0.0);
}

namespace detail {

// Defective density at decision time u = t - t0 for the given winner.
inline double defective_at_decision_time(double u, int winner_idx, const LbaParams& p,
                                         const LbaCovariates& cov) {
  if (u <= 0.0) return 0.0;
  const double b = p.threshold(cov.pressured);
  const double v0 = p.v_commit(cov.id_bits);
  if (winner_idx == 0)
    return lba_pdf(u, p.a_start, b, v0, p.s_drift) *
           (1.0 - lba_cdf(u, p.a_start, b, p.v_alt, p.s_drift));
  return lba_pdf(u, p.a_start, b, p.v_alt, p.s_drift) *
         (1.0 - lba_cdf(u, p.a_start, b, v0, p.s_drift));
}

// Gauss-Legendre rule mapped onto [0, 1]; nodes found by Newton iteration on
// the Legendre recurrence. Built once per size.
template <int N>
const std::array<std::pair<double, double>, N>& gauss_legendre_01() {
  static const std::array<std::pair<double, double>, N> rule = [] {
    std::array<std::pair<double, double>, N> r{};
    for (int i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      r[static_cast<std::size_t>(i)] = {0.5 * (x + 1.0),
                                        1.0 / ((1.0 - x * x) * dp * dp)};
    }
    return r;
  }();
  return rule;
}

}  // namespace detail

// Density of the given accumulator winning at time t_s, i.e. its crossing
// density times the survivor function of the competitor. Defective: the
// integral over all t equals that accumulator's response probability.
inline double lba_defective_density(double t_s, int winner_idx, const LbaParams& params,
                                    const LbaCovariates& cov) {
  validate(params);
  if (winner_idx < 0 || winner_idx > 1)
    throw std::invalid_argument("lba: winner index must be 0 (commit) or 1 (alternative)");
  if (cov.t0_cell < 0 || cov.t0_cell >= static_cast<int>(params.t0_s.size()))
    throw std::invalid_argument("lba: covariate t0 cell out of range");
  const double u = t_s - params.t0_s[static_cast<std::size_t>(cov.t0_cell)];
  return detail::defective_at_decision_time(u, winner_idx, params, cov);
}

// Probability that the given accumulator wins the race, by quadrature of its
// defective density over all decision times. Independent of t0.
inline double lba_win_probability(const LbaParams& params, const LbaCovariates& cov,
                                  int winner_idx = 0) {
  validate(params);
  auto f = [&](double u) {
    return detail::defective_at_decision_time(u, winner_idx, params, cov);
  };
  // Three pieces: a log-substituted head that resolves near-boundary spikes
  // at any scale, a plain rule on [0.05, 1], and the reciprocal tail.
  double mass = 0.0;
  const double lo = std::log(1e-9), hi = std::log(0.05);
  for (const auto& [node, weight] : detail::gauss_legendre_01<64>()) {
    const double x = lo + (hi - lo) * node;
    mass += weight * (hi - lo) * f(std::exp(x)) * std::exp(x);
  }
  for (const auto& [node, weight] : detail::gauss_legendre_01<64>())
    mass += weight * 0.95 * f(0.05 + 0.95 * node);
  for (const auto& [node, weight] : detail::gauss_legendre_01<32>())
    mass += weight * f(1.0 / node) / (node * node);
  return std::clamp(mass, 0.0, 1.0);
}

struct LbaTrial {
  double rt_s = 0.0;
  LbaCovariates cov;
};

// Negative log likelihood of the observed response times. Every trial is a
// commit-accumulator win by precondition, so each contribution is the commit
// defective density conditioned on the commit accumulator winning under the
// trial's covariates; without that normalization the estimator is free to
// inflate the win mass instead of fitting the shape. Any trial with zero
// density (e.g. rt at or below the cell's t0) makes the result infinite.
inline double negative_log_likelihood(std::span<const LbaTrial> data, const LbaParams& params) {
  if (data.empty()) throw std::invalid_argument("lba: empty dataset");
  validate(params);
  const int n_cells = static_cast<int>(params.t0_s.size());

  // The win probability depends on covariates only through drift and
  // threshold; cache it per distinct (id_bits, pressured).
  std::vector<std::pair<std::pair<double, bool>, double>> cache;
  auto log_win = [&](const LbaCovariates& cov) {
    for (const auto& [key, value] : cache)
      if (key.first == cov.id_bits && key.second == cov.pressured) return value;
    const double p = lba_win_probability(params, cov, 0);
    const double lp = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    cache.push_back({{cov.id_bits, cov.pressured}, lp});
    return lp;
  };

  double nll = 0.0;
  for (const LbaTrial& trial : data) {
    if (trial.cov.t0_cell < 0 || trial.cov.t0_cell >= n_cells)
      throw std::invalid_argument("lba: covariate t0 cell out of range");
    const double u = trial.rt_s - params.t0_s[static_cast<std::size_t>(trial.cov.t0_cell)];
    const double d = detail::defective_at_decision_time(u, 0, params, trial.cov);
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    const double lw = log_win(trial.cov);
    if (!std::isfinite(lw)) return std::numeric_limits<double>::infinity();
    nll -= std::log(d) - lw;
  }
  return nll;
}

struct LbaSample {
  double rt_s = 0.0;
  int winner_idx = 0;
};

// Forward simulation; trials where every drift comes out non-positive are
// redrawn rather than recorded as non-responses.
inline std::vector<LbaSample> simulate_lba(const LbaParams& params,
                                           std::span<const LbaCovariates> cases, int n,
                                           std::uint64_t seed) {
  validate(params);
  if (cases.empty()) throw std::invalid_argument("lba: no covariate cases");
  Rng rng(seed);
  std::vector<LbaSample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const LbaCovariates& cov = cases[static_cast<std::size_t>(i) % cases.size()];
    const double b = params.threshold(cov.pressured);
    const double v0_mean = params.v_commit(cov.id_bits);
    while (true) {
      const double start0 = rng.uniform(0.0, params.a_start);
      const double start1 = rng.uniform(0.0, params.a_start);
      const double d0 = rng.normal(v0_mean, params.s_drift);
      const double d1 = rng.normal(params.v_alt, params.s_drift);
      if (d0 <= 0.0 && d1 <= 0.0) continue;
      const double inf = std::numeric_limits<double>::infinity();
      const double t0_time = d0 > 0.0 ? (b - start0) / d0 : inf;
      const double t1_time = d1 > 0.0 ? (b - start1) / d1 : inf;
      const int winner = t0_time <= t1_time ? 0 : 1;
      samples.push_back({params.t0_s[static_cast<std::size_t>(cov.t0_cell)] +
                             std::min(t0_time, t1_time),
                         winner});
      break;
    }
  }
  return samples;
}

struct LbaFitOptions {
  int n_starts = 10;
  std::uint64_t seed = 1;
  int threads = 2;
  int min_trials_per_cell = 200;  // below this a low-n warning is emitted
  NelderMeadOptions nm{.max_iterations = 1500};
  NelderMeadOptions polish{.max_iterations = 3000};
};

struct LbaStartResult {
  double nll = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

struct LbaFitResult {
  LbaParams params;
  double nll = std::numeric_limits<double>::infinity();
  int best_start = -1;
  bool fitted_beta_id = false;
  bool fitted_beta_pressure = false;
  std::vector<LbaStartResult> starts;
  std::vector<std::string> warnings;
  // Bootstrap percentile intervals keyed by parameter name, when requested.
  std::vector<std::pair<std::string, std::pair<double, double>>> bootstrap_ci;
};

namespace detail {

// Optimizer coordinates: positives are fitted on the log scale. Start range
// and threshold gap carry small floors; without them datasets with repeated
// identical RTs (quantized or floored upstream) drive the likelihood to an
// unbounded point-mass spike.
inline constexpr double kLbaAStartFloor = 0.01;
inline constexpr double kLbaKGapFloor = 0.01;

struct LbaParamMap {
  int n_cells = 1;
  bool fit_beta_id = false;
  bool fit_beta_pressure = false;

  std::size_t size() const {
    return 3 + static_cast<std::size_t>(fit_beta_id) +
           static_cast<std::size_t>(fit_beta_pressure) + static_cast<std::size_t>(n_cells);
  }

  LbaParams unpack(std::span<const double> theta) const {
    LbaParams p;
    std::size_t i = 0;
    p.a_start = std::max(std::exp(theta[i++]), kLbaAStartFloor);
    p.k_gap = std::max(std::exp(theta[i++]), kLbaKGapFloor);
    p.v_commit_base = theta[i++];
    p.beta_id = fit_beta_id ? theta[i++] : 0.0;
    p.beta_pressure = fit_beta_pressure ? theta[i++] : 0.0;
    p.t0_s.resize(static_cast<std::size_t>(n_cells));
    for (int c = 0; c < n_cells; ++c) p.t0_s[static_cast<std::size_t>(c)] = std::exp(theta[i++]);
    return p;
  }

  std::vector<double> pack(const LbaParams& p) const {
    std::vector<double> theta;
    theta.push_back(std::log(p.a_start));
    theta.push_back(std::log(p.k_gap));
    theta.push_back(p.v_commit_base);
    if (fit_beta_id) theta.push_back(p.beta_id);
    if (fit_beta_pressure) theta.push_back(p.beta_pressure);
    for (double t0 : p.t0_s) theta.push_back(std::log(std::max(t0, 1e-6)));
    return theta;
  }
};

inline double safe_nll(std::span<const LbaTrial> data, const LbaParams& params) {
  try {
    return negative_log_likelihood(data, params);
  } catch (const std::invalid_argument&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace detail

// Maximum-likelihood fit with multi-start simplex search. Positivity is
// enforced through log parameterization; t0 is fitted per covariate cell.
// The best start is refined once with a tighter simplex. Starts run in
// parallel; the reduction is deterministic (min NLL, ties to the lower
// start index).
inline LbaFitResult fit_mle(std::span<const LbaTrial> data, const LbaFitOptions& options = {}) {
  if (data.empty()) throw std::invalid_argument("lba fit: empty dataset");

  int n_cells = 0;
  std::set<double> ids;
  bool any_pressure = false, all_pressure = true;
  double rt_min = std::numeric_limits<double>::infinity(), rt_max = 0.0;
  for (const LbaTrial& t : data) {
    n_cells = std::max(n_cells, t.cov.t0_cell + 1);
    ids.insert(t.cov.id_bits);
    any_pressure |= t.cov.pressured;
    all_pressure &= t.cov.pressured;
    rt_min = std::min(rt_min, t.rt_s);
    rt_max = std::max(rt_max, t.rt_s);
  }
  if (rt_max - rt_min < 1e-9)
    throw FitError("lba fit: degenerate dataset, response times have no variance");

  detail::LbaParamMap map;
  map.n_cells = n_cells;
  map.fit_beta_id = ids.size() >= 2;
  map.fit_beta_pressure = any_pressure && !all_pressure;

  LbaFitResult result;
  result.fitted_beta_id = map.fit_beta_id;
  result.fitted_beta_pressure = map.fit_beta_pressure;

  std::vector<double> cell_min_rt(static_cast<std::size_t>(n_cells),
                                  std::numeric_limits<double>::infinity());
  std::vector<int> cell_n(static_cast<std::size_t>(n_cells), 0);
  for (const LbaTrial& t : data) {
    auto c = static_cast<std::size_t>(t.cov.t0_cell);
    cell_min_rt[c] = std::min(cell_min_rt[c], t.rt_s);
    ++cell_n[c];
  }
  for (int c = 0; c < n_cells; ++c) {
    if (cell_n[static_cast<std::size_t>(c)] == 0)
      throw FitError("lba fit: t0 cell " + std::to_string(c) + " has no trials");
    if (cell_n[static_cast<std::size_t>(c)] < options.min_trials_per_cell)
      result.warnings.push_back("low trial count in t0 cell " + std::to_string(c) + ": " +
                                std::to_string(cell_n[static_cast<std::size_t>(c)]));
  }

  LbaParams init;
  init.a_start = 0.5;
  init.k_gap = 0.5;
  init.v_commit_base = 2.5;
  init.beta_id = map.fit_beta_id ? -0.2 : 0.0;
  init.beta_pressure = map.fit_beta_pressure ? 0.05 : 0.0;
  init.t0_s.resize(static_cast<std::size_t>(n_cells));
  for (int c = 0; c < n_cells; ++c)
    init.t0_s[static_cast<std::size_t>(c)] = 0.8 * cell_min_rt[static_cast<std::size_t>(c)];
  const std::vector<double> theta0 = map.pack(init);

  auto objective = [&](std::span<const double> theta) {
    return detail::safe_nll(data, map.unpack(theta));
  };

  // Pre-draw start points so thread scheduling cannot change them. Jittered
  // t0 coordinates are clamped below each cell's fastest response, which
  // would otherwise start the search on the infinite side of the support.
  std::vector<std::vector<double>> start_points;
  Rng start_rng(derive_seed(options.seed, {0x6c6261ull}));
  const std::size_t t0_offset = map.size() - static_cast<std::size_t>(n_cells);
  for (int s = 0; s < std::max(1, options.n_starts); ++s) {
    std::vector<double> theta = theta0;
    if (s > 0) {
      for (double& x : theta) x += start_rng.normal(0.0, 0.35);
      for (int c = 0; c < n_cells; ++c) {
        double& t0 = theta[t0_offset + static_cast<std::size_t>(c)];
        t0 = std::min(t0, std::log(0.88 * cell_min_rt[static_cast<std::size_t>(c)]));
      }
    }
    start_points.push_back(std::move(theta));
  }

  std::vector<NelderMeadResult> runs(start_points.size());
  std::vector<double> steps(map.size(), 0.25);
  const int threads = std::max(1, options.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t s = next.fetch_add(1);
      if (s >= start_points.size()) return;
      runs[s] = nelder_mead(objective, start_points[s], steps, options.nm);
    }
  };
  {
    std::vector<std::future<void>> pool;
    for (int t = 1; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : pool) f.get();
  }

  int best = -1;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    result.starts.push_back({runs[s].fx, runs[s].converged, runs[s].iterations});
    if (best < 0 || runs[s].fx < runs[static_cast<std::size_t>(best)].fx)
      best = static_cast<int>(s);
  }
  if (best < 0 || !std::isfinite(runs[static_cast<std::size_t>(best)].fx)) {
    std::string trace = "lba fit: no start converged to a finite likelihood;";
    for (std::size_t s = 0; s < runs.size(); ++s)
      trace += " start " + std::to_string(s) + " nll=" +
               std::to_string(runs[s].fx) + (runs[s].converged ? " (converged)" : "");
    throw FitError(trace);
  }

  // Polish the winner with progressively tighter fresh simplexes; a single
  // simplex tends to collapse before the minimum is pinned down.
  std::vector<double> x = runs[static_cast<std::size_t>(best)].x;
  double fx = runs[static_cast<std::size_t>(best)].fx;
  bool polished_converged = runs[static_cast<std::size_t>(best)].converged;
  for (double step : {0.02, 1e-3}) {
    std::vector<double> fine_steps(map.size(), step);
    const auto round = nelder_mead(objective, x, fine_steps, options.polish);
    if (round.fx <= fx) {
      x = round.x;
      fx = round.fx;
      polished_converged = round.converged;
    }
  }

  result.best_start = best;
  result.nll = fx;
  result.params = map.unpack(x);
  if (!polished_converged)
    result.warnings.push_back("optimizer hit the iteration cap; estimates may be loose");
  if (result.params.a_start <= 1.05 * detail::kLbaAStartFloor ||
      result.params.k_gap <= 1.05 * detail::kLbaKGapFloor)
    result.warnings.push_back(
        "boundary estimate: start range or threshold gap pinned at its floor; the response "
        "time distribution is likely degenerate for this model");
  return result;
}

// Central finite-difference gradient of the NLL in optimizer coordinates;
// used to audit convergence at a fitted solution.
inline std::vector<double> nll_gradient_scaled(std::span<const LbaTrial> data,
                                               const LbaFitResult& fit, double h = 1e-5) {
  detail::LbaParamMap map;
  map.n_cells = static_cast<int>(fit.params.t0_s.size());
  map.fit_beta_id = fit.fitted_beta_id;
  map.fit_beta_pressure = fit.fitted_beta_pressure;
  const std::vector<double> theta = map.pack(fit.params);
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> hi = theta, lo = theta;
    hi[i] += h;
    lo[i] -= h;
    grad[i] = (detail::safe_nll(data, map.unpack(hi)) - detail::safe_nll(data, map.unpack(lo))) /
              (2.0 * h);
  }
  return grad;
}

}  // namespace xrsim
