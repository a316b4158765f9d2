#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "wrapcop/errors.hpp"

namespace wrapcop {

struct SimplexOptions {
  int max_iterations = 2000;
  double diameter_tol = 1e-8;
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;  // simplex collapsed below diameter_tol
};

/*
 * Nelder-Mead simplex minimization with the standard coefficients
 * (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
 * Non-finite objective values are treated as +infinity, so the simplex
 * retreats from invalid regions instead of propagating NaNs.
 */
inline SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                                 std::span<const double> start, double initial_step = 0.5,
                                 SimplexOptions opts = {}) {
  if (opts.max_iterations < 1 || !(opts.diameter_tol > 0.0)) {
    throw invalid_parameter_error("nelder_mead: bad options");
  }
  const std::size_t k = start.size();
  const auto eval = [&](const std::vector<double>& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  SimplexResult out;
  if (k == 0) {
    out.value = eval({});
    out.converged = true;
    return out;
  }

  std::vector<std::vector<double>> vertex(k + 1, std::vector<double>(start.begin(), start.end()));
  std::vector<double> value(k + 1);
  for (std::size_t i = 1; i <= k; ++i) vertex[i][i - 1] += initial_step;
  for (std::size_t i = 0; i <= k; ++i) value[i] = eval(vertex[i]);

  std::vector<std::size_t> order(k + 1);
  std::vector<double> centroid(k), trial(k), trial2(k);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    for (std::size_t i = 0; i <= k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = order[0], worst = order[k], second = order[k - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        diameter = std::max(diameter, std::fabs(vertex[i][j] - vertex[best][j]));
      }
    }
    if (diameter < opts.diameter_tol) {
      out.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < k; ++j) centroid[j] += vertex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(k);

    for (std::size_t j = 0; j < k; ++j) trial[j] = centroid[j] + (centroid[j] - vertex[worst][j]);
    const double reflected = eval(trial);

    if (reflected < value[order[0]]) {
      for (std::size_t j = 0; j < k; ++j) {
        trial2[j] = centroid[j] + 2.0 * (centroid[j] - vertex[worst][j]);
      }
      const double expanded = eval(trial2);
      if (expanded < reflected) {
        vertex[worst] = trial2;
        value[worst] = expanded;
      } else {
        vertex[worst] = trial;
        value[worst] = reflected;
      }
      continue;
    }
    if (reflected < value[second]) {
      vertex[worst] = trial;
      value[worst] = reflected;
      continue;
    }
    if (reflected < value[worst]) {  // outside contraction
      for (std::size_t j = 0; j < k; ++j) trial2[j] = centroid[j] + 0.5 * (trial[j] - centroid[j]);
      const double contracted = eval(trial2);
      if (contracted <= reflected) {
        vertex[worst] = trial2;
        value[worst] = contracted;
        continue;
      }
    } else {  // inside contraction
      for (std::size_t j = 0; j < k; ++j) {
        trial2[j] = centroid[j] + 0.5 * (vertex[worst][j] - centroid[j]);
      }
      const double contracted = eval(trial2);
      if (contracted < value[worst]) {
        vertex[worst] = trial2;
        value[worst] = contracted;
        continue;
      }
    }
    for (std::size_t i = 0; i <= k; ++i) {  // shrink toward the best vertex
      if (i == best) continue;
      for (std::size_t j = 0; j < k; ++j) {
        vertex[i][j] = vertex[best][j] + 0.5 * (vertex[i][j] - vertex[best][j]);
      }
      value[i] = eval(vertex[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    if (value[i] < value[best]) best = i;
  }
  out.x = vertex[best];
  out.value = value[best];
  return out;
}

}  // namespace wrapcop
