#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace xrsim {

struct NelderMeadOptions {
  int max_iterations = 3000;
  double f_tolerance = 1e-11;  // spread of simplex values
  double x_tolerance = 1e-9;   // max vertex distance from the best point
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer (reflection/expansion/contraction/shrink
// with the classic coefficients). Infinite objective values are legal; they
// just lose comparisons.
inline NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
    std::span<const double> initial_steps, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += initial_steps[i];

  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    sort_order();
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    const double spread = values[worst] - values[best];
    double max_dist = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dj = simplex[i][j] - simplex[best][j];
        d += dj * dj;
      }
      max_dist = std::max(max_dist, std::sqrt(d));
    }
    if (std::isfinite(values[best]) && spread <= opt.f_tolerance &&
        max_dist <= opt.x_tolerance) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
      return p;
    };

    const auto reflected = blend(1.0);
    const double f_reflected = f(reflected);

    if (f_reflected < values[order[0]]) {
      const auto expanded = blend(2.0);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < values[worst];
      const auto contracted = blend(outside ? 0.5 : -0.5);
      const double f_contracted = f(contracted);
      if (f_contracted < (outside ? f_reflected : values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          values[i] = f(simplex[i]);
        }
      }
    }
  }

  sort_order();
  result.x = simplex[order[0]];
  result.fx = values[order[0]];
  result.iterations = iter;
  return result;
}

}  // namespace xrsim
