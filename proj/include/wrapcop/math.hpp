#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "wrapcop/errors.hpp"

namespace wrapcop {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double sq(double x) { return x * x; }

/* Fractional part mapped into [0, 1); exact integers (including 1) map to 0. */
inline double frac(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;  // guards against floating point drift just below an integer
  return f;
}

/* Wrapped sum of two points in [0, 1]. */
inline double wrap_add(double a, double b) { return frac(a + b); }

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/* ---- deterministic reductions ------------------------------------------ */

/* Pairwise summation: fixed association order independent of thread count. */
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) throw dimension_error("mean_of: empty input");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw dimension_error("sample_variance: need at least 2 values");
  const double m = mean_of(v);
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = sq(v[i] - m);
  return pairwise_sum(dev) / static_cast<double>(v.size() - 1);
}

inline double sample_sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

/* Linear-interpolation quantile of an ascending-sorted sample. */
inline double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw dimension_error("sorted_quantile: empty input");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

inline double sorted_iqr(std::span<const double> sorted) {
  return sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
}

/* 1-based ranks; tied values share the average of their rank block. */
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/* Pearson correlation coefficient. */
inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw dimension_error("pearson_correlation: need two equal-length samples");
  }
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw data_error("pearson_correlation: degenerate sample");
  return sxy / std::sqrt(sxx * syy);
}

/* ---- special functions -------------------------------------------------- */

/* Modified Bessel I0 via power series (small arguments). */
/* I0(x) - 1, summed so tiny arguments keep full relative precision */
inline double i0m1_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * (1.0 + sum)) break;
  }
  return sum;
}

inline double i0_series(double x) { return 1.0 + i0m1_series(x); }

/* log I0(x): series below |x| = 15, asymptotic expansion above. */
inline double log_i0(double x) {
  x = std::fabs(x);
  if (x <= 15.0) return std::log1p(i0m1_series(x));
  // I0(x) ~ e^x / sqrt(2 pi x) * sum_k prod_{j<=k}(2j-1)^2 / (k! (8x)^k)
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * sq(2.0 * k - 1.0) / (8.0 * k * x);
    if (next >= term) break;  // asymptotic series started diverging
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return x + std::log(sum) - 0.5 * std::log(two_pi * x);
}

inline double i0(double x) { return std::exp(log_i0(x)); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(two_pi); }

inline double log_normal_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(two_pi); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("normal_quantile: p must lie in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/* Regularized incomplete beta I_x(a, b) and its inverse in x. */
inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

inline double reg_inc_beta_inv(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return boost::math::ibeta_inv(a, b, p);
}

inline double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace wrapcop
