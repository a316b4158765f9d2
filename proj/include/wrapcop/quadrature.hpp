#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "wrapcop/errors.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/rng.hpp"

namespace wrapcop {

/* Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration. */
template <int N>
struct GaussLegendre {
  std::array<double, N> x{}, w{};

  GaussLegendre() {
    for (int k = 0; k < (N + 1) / 2; ++k) {
      double z = std::cos(pi * (k + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int j = 2; j <= N; ++j) {
          const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double znew = z - p1 / dp;
        if (znew == z) break;  // fixed point at machine precision
        z = znew;
      }
      x[k] = -z;
      x[N - 1 - k] = z;
      w[k] = w[N - 1 - k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }
};

template <typename F>
double gl_panel(const F& f, double a, double b) {
  const auto& rule = GaussLegendre<12>::instance();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += rule.w[i] * f(c + h * rule.x[i]);
  return s * h;
}

namespace detail {

template <typename F>
double integrate_rec(const F& f, double a, double b, double whole, double tol, int depth,
                     double& leaked, int& panels_left) {
  if ((panels_left -= 2) < 0) {
    throw numeric_error("integrate: panel budget exhausted (integrand is effectively singular)",
                        std::numeric_limits<double>::infinity());
  }
  const double m = 0.5 * (a + b);
  const double left = gl_panel(f, a, m);
  const double right = gl_panel(f, m, b);
  const double err = std::fabs(whole - left - right);
  if (err <= tol || depth <= 0) {
    if (err > tol) leaked += err;
    return left + right;
  }
  return integrate_rec(f, a, m, left, 0.5 * tol, depth - 1, leaked, panels_left) +
         integrate_rec(f, m, b, right, 0.5 * tol, depth - 1, leaked, panels_left);
}

}  // namespace detail

/*
 * Adaptive integral of f over [a, b] to absolute tolerance abs_tol.
 * Throws numeric_error when the subdivision budget is exhausted before the
 * tolerance is met, either in depth (with the achieved error bound) or in
 * total panel count (near-singular integrands such as collapsed mixture
 * components would otherwise subdivide without useful progress).
 */
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10, int max_depth = 52,
                 int max_panels = 4000) {
  if (!(b >= a)) throw dimension_error("integrate: requires b >= a");
  if (a == b) return 0.0;
  double leaked = 0.0;
  const double whole = gl_panel(f, a, b);
  int panels_left = max_panels;
  const double v = detail::integrate_rec(f, a, b, whole, abs_tol, max_depth, leaked, panels_left);
  if (leaked > abs_tol) {
    throw numeric_error("integrate: tolerance not reached", leaked);
  }
  return v;
}

/* Integral over [a, b] split at known interior kinks for smooth panels. */
template <typename F>
double integrate_split(const F& f, double a, double b, std::vector<double> cuts,
                       double abs_tol = 1e-10) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(a, cuts[i]), hi = std::min(b, cuts[i + 1]);
    if (hi > lo) s += integrate(f, lo, hi, abs_tol / static_cast<double>(cuts.size()));
  }
  return s;
}

/* ---- quasi-Monte Carlo -------------------------------------------------- */

inline double halton(std::uint64_t index, unsigned base) {
  double r = 0.0, f = 1.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

struct QmcEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/*
 * Mean of f over the unit cube [0,1]^dim by randomly shifted Halton sets:
 * n_shifts independent Cranley-Patterson shifts, points_per_shift points
 * each. The shift spread yields the reported standard error. Deterministic
 * for a fixed seed.
 */
template <typename F>
QmcEstimate qmc_mean(int dim, const F& f, std::size_t points_per_shift = 8192,
                     int n_shifts = 8, std::uint64_t seed = 0x9e3779b9u) {
  static const unsigned bases[9] = {2, 3, 5, 7, 11, 13, 17, 19, 23};
  if (dim < 1 || dim > 9) throw dimension_error("qmc_mean: dim must be in [1, 9]");
  std::vector<double> shift_means(n_shifts);
  std::vector<double> vals(points_per_shift);
  std::vector<double> pt(dim), shift(dim);
  for (int r = 0; r < n_shifts; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    for (int j = 0; j < dim; ++j) shift[j] = rng.uniform();
    for (std::size_t i = 0; i < points_per_shift; ++i) {
      for (int j = 0; j < dim; ++j) pt[j] = frac(halton(i + 1, bases[j]) + shift[j]);
      vals[i] = f(pt);
    }
    shift_means[r] = mean_of(vals);
  }
  QmcEstimate out;
  out.value = mean_of(shift_means);
  if (n_shifts > 1) {
    out.std_error = sample_sd(shift_means) / std::sqrt(static_cast<double>(n_shifts));
  }
  return out;
}

}  // namespace wrapcop
