#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wrapcop/copula.hpp"
#include "wrapcop/errors.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/matrix.hpp"
#include "wrapcop/parallel.hpp"

namespace wrapcop {

enum class ConcordanceSource { closed_form, oracle, sample };

inline const char* concordance_source_name(ConcordanceSource s) {
  switch (s) {
    case ConcordanceSource::closed_form: return "closed_form";
    case ConcordanceSource::oracle: return "oracle";
    case ConcordanceSource::sample: return "sample";
  }
  return "?";
}

struct ConcordanceReport {
  double rho = 0.0;
  double tau = 0.0;
  double xi = 0.0;
  int sign_factor = 1;
  ConcordanceSource source = ConcordanceSource::closed_form;
  bool tie_warning = false;
};

namespace detail {

inline void require_bivariate(const CopulaModel& model, const char* what) {
  if (model.dim() != 2) {
    throw dimension_error(std::string(what) + " is defined for bivariate models only");
  }
}

}  // namespace detail

/*
 * All three population measures reduce to moments of the generator:
 *   rho = sgn (6 E[X(1-X)] - 1)
 *   tau = sgn (4 E[X(1-X)] + 2 E|X-X'| - 4 Var X - 1)
 *   xi  = 12 Var X - 6 E|X-X'| + 1           (orientation free)
 * with sgn = (-1)^(s1+s2).
 */
inline ConcordanceReport concordance_from_moments(const GeneratorMoments& m, int sign_factor) {
  const double sgn = static_cast<double>(sign_factor);
  ConcordanceReport r;
  r.sign_factor = sign_factor;
  r.source = ConcordanceSource::closed_form;
  r.rho = sgn * (6.0 * m.e_x_1mx - 1.0);
  r.tau = sgn * (4.0 * m.e_x_1mx + 2.0 * m.mean_abs_diff - 4.0 * m.variance - 1.0);
  r.xi = 12.0 * m.variance - 6.0 * m.mean_abs_diff + 1.0;
  // the measures are exact rationals for e.g. the uniform generator; suppress
  // quadrature dust so independence reports as exactly zero
  for (double* v : {&r.rho, &r.tau, &r.xi}) {
    if (std::fabs(*v) < 1e-13) *v = 0.0;
  }
  return r;
}

inline ConcordanceReport closed_form_concordance(const CopulaModel& model) {
  detail::require_bivariate(model, "closed_form_concordance");
  return concordance_from_moments(model.generator().moments(), model.sign_factor());
}

inline double spearman_rho(const CopulaModel& model) {
  detail::require_bivariate(model, "spearman_rho");
  return closed_form_concordance(model).rho;
}

inline double kendall_tau(const CopulaModel& model) {
  detail::require_bivariate(model, "kendall_tau");
  return closed_form_concordance(model).tau;
}

inline double dss_xi(const CopulaModel& model) {
  detail::require_bivariate(model, "dss_xi");
  return closed_form_concordance(model).xi;
}

struct OracleGrid {
  int cells = 2048;
  int threads = 1;
};

/*
 * Brute-force cross-check of the closed forms by tensor midpoint quadrature:
 *   rho = 12 int u1 u2 c(u) du - 3
 *   tau = 1 - 4 int d1C d2C du
 *   xi  = 6 int (d1C)^2 du - 2
 * The density is constant along +-45-degree diagonals, so one pdf/cdf table
 * per grid suffices. Cells crossed by a discontinuity of the wrapped density
 * (the wrap line and histogram bin edges) are split along the jump line and
 * evaluated at the two piece centroids, which restores O(h^2) accuracy for
 * the density integral; the conditional-cdf integrands are continuous and
 * need no splitting. Summation is pairwise over per-row totals, so results
 * do not depend on the thread count.
 */
inline ConcordanceReport oracle_concordance(const CopulaModel& model, OracleGrid grid = {}) {
  detail::require_bivariate(model, "oracle_concordance");
  const int m = grid.cells;
  if (m < 16 || m > (1 << 16)) throw invalid_parameter_error("oracle grid cells must lie in [16, 65536]");
  const Generator& f = model.generator();
  const bool diff_mode = model.signature().bit(1) == 1;  // density constant on u1 - u2
  const double h = 1.0 / static_cast<double>(m);

  // tables: F at bin edges and midpoints, f at edge values (the wrapped sum
  // of two midpoints always lands on an edge)
  std::vector<double> f_edge(static_cast<std::size_t>(m));
  std::vector<double> cdf_edge(static_cast<std::size_t>(m) + 1);
  std::vector<double> cdf_mid(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double e = static_cast<double>(j) / m;
    f_edge[static_cast<std::size_t>(j)] = f.pdf(e);
    cdf_edge[static_cast<std::size_t>(j)] = f.cdf(e);
    cdf_mid[static_cast<std::size_t>(j)] = f.cdf((j + 0.5) / m);
    if (!std::isfinite(f_edge[static_cast<std::size_t>(j)])) {
      throw singular_generator_error(
          "oracle_concordance: generator density is unbounded on the grid; "
          "use the moment-based closed forms instead");
    }
  }
  cdf_edge[static_cast<std::size_t>(m)] = 1.0;

  // jump lines of the wrapped density in the diagonal coordinate
  // t = u1 + u2 (or u1 - u2): the generator's own discontinuities at every
  // integer shift that intersects the range of t, plus the wrap line itself
  std::vector<double> jump_t;
  {
    std::vector<double> base = f.jump_locations();
    base.push_back(0.0);  // wrap
    const double t_lo = diff_mode ? -1.0 : 0.0;
    const double t_hi = diff_mode ? 1.0 : 2.0;
    for (double c : base) {
      for (int shift = -1; shift <= 2; ++shift) {
        const double t = c + shift;
        if (t > t_lo && t < t_hi) jump_t.push_back(t);
      }
    }
    std::sort(jump_t.begin(), jump_t.end());
    jump_t.erase(std::unique(jump_t.begin(), jump_t.end()), jump_t.end());
  }

  const auto pdf_at = [&](double t) { return f.pdf(frac(t)); };

  std::vector<double> row_rho(static_cast<std::size_t>(m));
  std::vector<double> row_tau(static_cast<std::size_t>(m));
  std::vector<double> row_xi(static_cast<std::size_t>(m));

  parallel_for(static_cast<std::size_t>(m), grid.threads, [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const double x1 = (i + 0.5) * h;
    double acc_rho = 0.0, acc_tau = 0.0, acc_xi = 0.0;

    // columns whose cell is crossed by a jump line get the split treatment
    // for the density term; every jump line is parallel to the cell diagonal
    // and lines are far enough apart that a cell meets at most one
    std::vector<std::pair<int, double>> splits;
    for (double t : jump_t) {
      // cell (i, j) spans diagonal values (t_center - h, t_center + h)
      const double center_units = diff_mode ? (static_cast<double>(i) - t * m)
                                            : (t * m - static_cast<double>(i) - 1.0);
      const int j_lo = static_cast<int>(std::floor(center_units - 1.0));
      for (int j = j_lo; j <= j_lo + 2; ++j) {
        if (j < 0 || j >= m) continue;
        const double t_center = diff_mode ? (i - j) * h : (i + j + 1) * h;
        if (t > t_center - h && t < t_center + h) splits.emplace_back(j, t);
      }
    }
    std::sort(splits.begin(), splits.end());

    std::size_t next_split = 0;
    for (int j = 0; j < m; ++j) {
      const double x2 = (j + 0.5) * h;
      // wrapped sum of the two (oriented) midpoints, as an edge index
      int e = diff_mode ? (i - j) : (i + j + 1);
      e -= m * static_cast<int>(std::floor(static_cast<double>(e) / m));
      if (e == m) e = 0;
      const bool wrapped = diff_mode ? (i >= j) : (i + j + 1 >= m);

      // conditional cdfs d1C, d2C from the closed arc-mass form
      const double fe = cdf_edge[static_cast<std::size_t>(e)];
      double g1, g2;
      if (diff_mode) {
        // d1C = 1 - G(u1, 1-u2), d2C = G(1-u2, u1)
        g1 = 1.0 - (fe - cdf_mid[static_cast<std::size_t>(i)] + (wrapped ? 1.0 : 0.0));
        g2 = fe - cdf_mid[static_cast<std::size_t>(m - 1 - j)] + (wrapped ? 1.0 : 0.0);
      } else {
        g1 = fe - cdf_mid[static_cast<std::size_t>(i)] + (wrapped ? 1.0 : 0.0);
        g2 = fe - cdf_mid[static_cast<std::size_t>(j)] + (wrapped ? 1.0 : 0.0);
      }
      acc_tau += g1 * g2;
      acc_xi += g1 * g1;

      if (next_split < splits.size() && splits[next_split].first == j) {
        const double t_jump = splits[next_split].second;
        ++next_split;
        // split the cell along the jump line; the below-line piece grows
        // from the min-t corner with leg length ell
        const double a1 = i * h, a2 = j * h;
        const double t_min = diff_mode ? (a1 - a2 - h) : (a1 + a2);
        const double ell = t_jump - t_min;
        double b_area, b_c1, b_c2;  // below piece: area and centroid
        if (ell <= h) {
          b_area = 0.5 * ell * ell;
          b_c1 = a1 + ell / 3.0;
          b_c2 = diff_mode ? (a2 + h - ell / 3.0) : (a2 + ell / 3.0);
        } else {
          const double lp = 2.0 * h - ell;  // complement (above) triangle leg
          const double t_area = 0.5 * lp * lp;
          const double t_c1 = a1 + h - lp / 3.0;
          const double t_c2 = diff_mode ? (a2 + lp / 3.0) : (a2 + h - lp / 3.0);
          b_area = h * h - t_area;
          b_c1 = ((a1 + 0.5 * h) * h * h - t_c1 * t_area) / b_area;
          b_c2 = ((a2 + 0.5 * h) * h * h - t_c2 * t_area) / b_area;
        }
        const double a_area = h * h - b_area;
        const double a_c1 = ((a1 + 0.5 * h) * h * h - b_c1 * b_area) / a_area;
        const double a_c2 = ((a2 + 0.5 * h) * h * h - b_c2 * b_area) / a_area;
        const double t_b = diff_mode ? (b_c1 - b_c2) : (b_c1 + b_c2);
        const double t_a = diff_mode ? (a_c1 - a_c2) : (a_c1 + a_c2);
        const double fb = pdf_at(t_b), fa = pdf_at(t_a);
        if (!std::isfinite(fb) || !std::isfinite(fa)) {
          throw singular_generator_error(
              "oracle_concordance: generator density is unbounded on the grid; "
              "use the moment-based closed forms instead");
        }
        // cell average of u1 u2 c(u), in units of one cell
        acc_rho += (b_area * b_c1 * b_c2 * fb + a_area * a_c1 * a_c2 * fa) / (h * h);
      } else {
        acc_rho += x1 * x2 * f_edge[static_cast<std::size_t>(e)];
      }
    }
    row_rho[row] = acc_rho;
    row_tau[row] = acc_tau;
    row_xi[row] = acc_xi;
  });

  const double cell = h * h;
  const double int_rho = pairwise_sum(row_rho) * cell;
  const double int_tau = pairwise_sum(row_tau) * cell;
  const double int_xi = pairwise_sum(row_xi) * cell;

  ConcordanceReport r;
  r.sign_factor = model.sign_factor();
  r.source = ConcordanceSource::oracle;
  r.rho = 12.0 * int_rho - 3.0;
  r.tau = 1.0 - 4.0 * int_tau;
  r.xi = 6.0 * int_xi - 2.0;
  return r;
}

namespace detail {

/* Number of strictly descending pairs (i < j with v[i] > v[j]) by merge
 * sort; v is consumed as scratch. */
inline std::uint64_t merge_count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                            std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t cnt = merge_count_inversions(v, buf, lo, mid) +
                      merge_count_inversions(v, buf, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      cnt += mid - a;  // every remaining left element exceeds v[b]
      buf[out++] = v[b++];
    } else {
      buf[out++] = v[a++];
    }
  }
  while (a < mid) buf[out++] = v[a++];
  while (b < hi) buf[out++] = v[b++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return cnt;
}

inline std::uint64_t tie_pair_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::uint64_t pairs = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const std::uint64_t run = j - i + 1;
    pairs += run * (run - 1) / 2;
    i = j + 1;
  }
  return pairs;
}

}  // namespace detail

/*
 * Rank-based estimates from an n x 2 sample: Spearman as the rank Pearson
 * correlation, Kendall by inversion counting (tau-b under ties), and
 * Chatterjee's xi_n from the running ranks of the second column after
 * ordering by the first. xi_n has no tie correction; ties only raise the
 * tie_warning flag.
 */
inline ConcordanceReport sample_concordance(const Matrix& data) {
  if (data.cols() != 2) throw dimension_error("sample_concordance expects two columns");
  const std::size_t n = data.rows();
  if (n < 3) throw data_error("sample_concordance needs at least 3 observations");
  const std::vector<double> x = data.column(0);
  const std::vector<double> y = data.column(1);

  ConcordanceReport r;
  r.sign_factor = 1;
  r.source = ConcordanceSource::sample;

  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  r.rho = pearson_correlation(rx, ry);

  // Kendall: sort lexicographically by (x, y); discordant pairs are the
  // strict inversions of the y-sequence
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::uint64_t joint_ties = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && x[idx[j + 1]] == x[idx[i]] && y[idx[j + 1]] == y[idx[i]]) ++j;
      const std::uint64_t run = j - i + 1;
      joint_ties += run * (run - 1) / 2;
      i = j + 1;
    }
  }
  std::vector<double> scratch(ys), buf(n);
  const std::uint64_t discordant = detail::merge_count_inversions(scratch, buf, 0, n);
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t tx = detail::tie_pair_count(x);
  const std::uint64_t ty = detail::tie_pair_count(y);
  r.tie_warning = (tx > 0 || ty > 0);
  const double num = static_cast<double>(n0) - static_cast<double>(tx) -
                     static_cast<double>(ty) + static_cast<double>(joint_ties) -
                     2.0 * static_cast<double>(discordant);
  const double den = std::sqrt((static_cast<double>(n0) - static_cast<double>(tx)) *
                               (static_cast<double>(n0) - static_cast<double>(ty)));
  if (den == 0.0) throw data_error("sample_concordance: a margin is constant");
  r.tau = num / den;

  // Chatterjee's xi_n: running ranks of y in x-order
  std::vector<double> sorted_y(y);
  std::sort(sorted_y.begin(), sorted_y.end());
  double jump_sum = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = y[idx[i]];
    const double rank = static_cast<double>(
        std::upper_bound(sorted_y.begin(), sorted_y.end(), yi) - sorted_y.begin());
    if (i > 0) jump_sum += std::fabs(rank - prev);
    prev = rank;
  }
  r.xi = 1.0 - 3.0 * jump_sum / (static_cast<double>(n) * static_cast<double>(n) - 1.0);
  return r;
}

}  // namespace wrapcop
