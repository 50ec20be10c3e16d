#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "xrsim/lba.hpp"
#include "xrsim/rng.hpp"

using namespace xrsim;

namespace {

// Composite Simpson quadrature oracle for decision-time densities on
// (0, inf): direct rule on (0, 1], reciprocal substitution on [1, inf).
double integrate_density(const std::function<double(double)>& f) {
  auto simpson = [](const std::function<double(double)>& g, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = g(a) + g(b);
    for (int i = 1; i < n; ++i) acc += g(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  const double head = simpson(f, 1e-12, 1.0, 4000);
  const double tail = simpson(
      [&](double w) { return w > 1e-12 ? f(1.0 / w) / (w * w) : 0.0; }, 1e-12, 1.0, 4000);
  return head + tail;
}

LbaParams recovery_params() {
  LbaParams p;
  p.a_start = 0.5;
  p.k_gap = 0.5;
  p.v_commit_base = 3.0;
  p.beta_id = -0.4;
  p.t0_s = {0.20, 0.35};
  return p;
}

std::vector<LbaCovariates> recovery_cases() {
  std::vector<LbaCovariates> cases;
  for (int cell = 0; cell < 2; ++cell)
    for (double id : {2.0, 4.0, 6.0}) cases.push_back({id, false, cell});
  return cases;
}

std::vector<LbaTrial> commit_wins(const std::vector<LbaSample>& samples,
                                  const std::vector<LbaCovariates>& cases) {
  std::vector<LbaTrial> data;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].winner_idx == 0) data.push_back({samples[i].rt_s, cases[i % cases.size()]});
  return data;
}

}  // namespace

TEST_CASE("density vanishes at the support boundary", "[lba]") {
  LbaParams p;
  const LbaCovariates cov{3.0, false, 0};
  CHECK(lba_defective_density(p.t0_s[0], 0, p, cov) == 0.0);
  CHECK(lba_defective_density(p.t0_s[0] + 1e-9, 0, p, cov) == Catch::Approx(0.0).margin(1e-6));
  CHECK(lba_defective_density(p.t0_s[0] - 0.05, 0, p, cov) == 0.0);
}

TEST_CASE("raising t0 translates the density exactly", "[lba]") {
  LbaParams p;
  LbaParams shifted = p;
  const double delta = 0.13;
  shifted.t0_s[0] += delta;
  const LbaCovariates cov{2.0, false, 0};
  for (double t : {0.3, 0.5, 0.9, 1.7}) {
    CHECK(lba_defective_density(t, 0, p, cov) ==
          Catch::Approx(lba_defective_density(t + delta, 0, shifted, cov)).epsilon(1e-12));
  }
}

TEST_CASE("density is non-negative and finite on the analysis window", "[lba]") {
  LbaParams p;
  p.v_commit_base = 5.03;
  p.beta_id = -0.93;
  p.beta_pressure = 0.06;
  p.t0_s = {0.1};
  for (double t = 0.2; t <= 5.0; t += 0.01) {
    for (int w : {0, 1}) {
      const double d = lba_defective_density(t, w, p, {4.0, true, 0});
      CHECK(d >= 0.0);
      CHECK(std::isfinite(d));
    }
  }
}

TEST_CASE("defective densities integrate to the response mass", "[lba]") {
  LbaParams p = recovery_params();
  const LbaCovariates cov{3.0, false, 0};

  const double v_commit = p.v_commit(cov.id_bits);
  auto density_sum = [&](double u) {
    return lba_defective_density(p.t0_s[0] + u, 0, p, cov) +
           lba_defective_density(p.t0_s[0] + u, 1, p, cov);
  };
  const double mass = integrate_density(density_sum);

  // The simulator redraws when every drift is non-positive, so its response
  // mass is 1; the raw defective mass is short by exactly that probability.
  const double p_all_nonpositive =
      normal_cdf(-v_commit / p.s_drift) * normal_cdf(-p.v_alt / p.s_drift);
  CHECK(mass == Catch::Approx(1.0 - p_all_nonpositive).margin(1e-5));
  CHECK(mass == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("win shares match quadrature of the defective density", "[lba]") {
  LbaParams p = recovery_params();
  const std::vector<LbaCovariates> cases = {{3.0, false, 0}};

  auto commit_density = [&](double u) {
    return lba_defective_density(p.t0_s[0] + u, 0, p, cases[0]);
  };
  const double predicted_share = integrate_density(commit_density);

  const int n = 1000000;
  const auto samples = simulate_lba(p, cases, n, 555);
  int commits = 0;
  for (const auto& s : samples) commits += s.winner_idx == 0;
  const double empirical = static_cast<double>(commits) / n;

  CHECK(empirical == Catch::Approx(predicted_share).margin(0.01));
}

TEST_CASE("deterministic limit of the simulator", "[lba]") {
  LbaParams p;
  p.a_start = 1e-12;
  p.k_gap = 0.5;
  p.v_commit_base = 2.0;
  p.s_drift = 1e-9;
  p.v_alt = 1.0;
  p.t0_s = {0.2};
  const std::vector<LbaCovariates> cases = {{0.0, false, 0}};
  const auto samples = simulate_lba(p, cases, 100, 9);
  for (const auto& s : samples) {
    CHECK(s.winner_idx == 0);
    CHECK(s.rt_s == Catch::Approx(0.2 + 0.5 / 2.0).margin(1e-6));
  }
}

TEST_CASE("identical seeds reproduce samples", "[lba]") {
  const LbaParams p = recovery_params();
  const auto cases = recovery_cases();
  const auto a = simulate_lba(p, cases, 2000, 42);
  const auto b = simulate_lba(p, cases, 2000, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rt_s == b[i].rt_s);
    CHECK(a[i].winner_idx == b[i].winner_idx);
  }
}

TEST_CASE("likelihood prefers the density maximum", "[lba]") {
  LbaParams p;
  const LbaCovariates cov{2.0, false, 0};
  double best_t = 0.0, best_d = -1.0;
  for (double t = 0.21; t < 3.0; t += 0.001) {
    const double d = lba_defective_density(t, 0, p, cov);
    if (d > best_d) {
      best_d = d;
      best_t = t;
    }
  }
  const std::vector<LbaTrial> at_max = {{best_t, cov}};
  LbaParams off = p;
  off.t0_s[0] += 0.1;
  CHECK(negative_log_likelihood(at_max, p) < negative_log_likelihood(at_max, off));
}

TEST_CASE("rt below the support makes the likelihood infinite", "[lba]") {
  LbaParams p;
  const std::vector<LbaTrial> data = {{0.5, {2.0, false, 0}},
                                      {p.t0_s[0] - 0.01, {2.0, false, 0}}};
  CHECK(std::isinf(negative_log_likelihood(data, p)));
}

TEST_CASE("empty dataset is rejected", "[lba]") {
  CHECK_THROWS_AS(negative_log_likelihood({}, LbaParams{}), std::invalid_argument);
  CHECK_THROWS_AS(fit_mle({}), std::invalid_argument);
}

TEST_CASE("generating parameters beat random perturbations", "[lba][slow]") {
  const LbaParams p = recovery_params();
  const auto cases = recovery_cases();
  const auto data = commit_wins(simulate_lba(p, cases, 5000, 101), cases);
  REQUIRE(data.size() > 3000);

  const double nll_gen = negative_log_likelihood(data, p);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    LbaParams q = p;
    auto wiggle = [&](double x) { return x * rng.uniform(0.8, 1.2); };
    q.a_start = wiggle(q.a_start);
    q.k_gap = wiggle(q.k_gap);
    q.v_commit_base = wiggle(q.v_commit_base);
    q.beta_id = wiggle(q.beta_id);
    q.t0_s[0] = wiggle(q.t0_s[0]);
    q.t0_s[1] = wiggle(q.t0_s[1]);
    CHECK(negative_log_likelihood(data, q) >= nll_gen);
  }
}

TEST_CASE("parameter recovery from simulated data", "[lba][slow]") {
  const LbaParams truth = recovery_params();
  const auto cases = recovery_cases();
  const auto data = commit_wins(simulate_lba(truth, cases, 5000, 1), cases);

  LbaFitOptions opts;
  opts.seed = 31;
  const auto fit = fit_mle(data, opts);

  CHECK(fit.fitted_beta_id);
  CHECK_FALSE(fit.fitted_beta_pressure);
  CHECK(fit.params.v_commit_base == Catch::Approx(3.0).margin(0.15));
  CHECK(fit.params.t0_s[0] == Catch::Approx(0.20).margin(0.02));
  CHECK(fit.params.t0_s[1] == Catch::Approx(0.35).margin(0.02));
  CHECK(fit.params.beta_id < 0.0);
  CHECK(fit.params.t0_s[1] > fit.params.t0_s[0]);

  // Convergence audit: scaled gradient at the optimum is numerically flat.
  const auto grad = nll_gradient_scaled(data, fit);
  for (double g : grad) CHECK(std::abs(g) < 1e-2);
}

TEST_CASE("degenerate datasets are refused", "[lba]") {
  std::vector<LbaTrial> flat;
  for (int i = 0; i < 50; ++i) flat.push_back({0.8, {3.0, false, 0}});
  CHECK_THROWS_AS(fit_mle(flat), FitError);
}

TEST_CASE("low trial counts produce a warning", "[lba]") {
  const LbaParams p = recovery_params();
  const auto cases = recovery_cases();
  const auto data = commit_wins(simulate_lba(p, cases, 300, 3), cases);
  LbaFitOptions opts;
  opts.n_starts = 4;
  const auto fit = fit_mle(data, opts);
  CHECK_FALSE(fit.warnings.empty());
}
