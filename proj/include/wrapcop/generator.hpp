#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wrapcop/errors.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/quadrature.hpp"
#include "wrapcop/rng.hpp"

namespace wrapcop {

enum class Family {
  uniform,
  triangular,
  beta,
  trunc_normal,
  kumaraswamy,
  logit_normal,
  von_mises,
  piecewise_constant,
  mixture,
  tabulated,
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::uniform: return "uniform";
    case Family::triangular: return "triangular";
    case Family::beta: return "beta";
    case Family::trunc_normal: return "trunc_normal";
    case Family::kumaraswamy: return "kumaraswamy";
    case Family::logit_normal: return "logit_normal";
    case Family::von_mises: return "von_mises";
    case Family::piecewise_constant: return "piecewise_constant";
    case Family::mixture: return "mixture";
    case Family::tabulated: return "tabulated";
  }
  return "?";
}

struct GeneratorMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  double e_x_1mx = 0.0;       // E[X(1-X)]
  double mean_abs_diff = 0.0;  // E|X - X'| for iid X, X'
};

/*
 * A probability density on [0, 1]. Immutable after construction; evaluation
 * constants (normalizers, Fourier ratios, cumulative bin masses) are
 * precomputed so pdf/cdf/quantile are cheap and thread-safe.
 */
class Generator {
public:
  /* ---- constructors ---- */

  static Generator uniform() { return Generator(Family::uniform); }

  /* Support [0, b], mode m, 0 < m <= b <= 1; density 2x/(bm) rising then falling. */
  static Generator triangular(double b, double m) {
    if (!(m > 0.0 && m <= b && b <= 1.0)) {
      throw invalid_parameter_error("triangular: need 0 < m <= b <= 1");
    }
    Generator g(Family::triangular);
    g.p_ = {b, m};
    return g;
  }

  static Generator beta(double alpha, double beta_) {
    if (!(alpha > 0.0 && beta_ > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta_)) {
      throw invalid_parameter_error("beta: shape parameters must be positive and finite");
    }
    Generator g(Family::beta);
    g.p_ = {alpha, beta_};
    g.aux_ = {log_beta_fn(alpha, beta_), 0.0};
    return g;
  }

  static Generator trunc_normal(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
      throw invalid_parameter_error("trunc_normal: need finite mu and sigma > 0");
    }
    Generator g(Family::trunc_normal);
    g.p_ = {mu, sigma};
    const double lo = normal_cdf((0.0 - mu) / sigma);
    const double hi = normal_cdf((1.0 - mu) / sigma);
    if (!(hi > lo)) throw invalid_parameter_error("trunc_normal: no mass on [0,1]");
    g.aux_ = {lo, hi};
    return g;
  }

  static Generator kumaraswamy(double a, double b) {
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw invalid_parameter_error("kumaraswamy: shape parameters must be positive and finite");
    }
    Generator g(Family::kumaraswamy);
    g.p_ = {a, b};
    return g;
  }

  static Generator logit_normal(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
      throw invalid_parameter_error("logit_normal: need finite mu and sigma > 0");
    }
    Generator g(Family::logit_normal);
    g.p_ = {mu, sigma};
    return g;
  }

  /* Density exp(phi1 cos(2 pi x) + phi2 sin(2 pi x)) / I0(|phi|). */
  static Generator von_mises(double phi1, double phi2) {
    if (!std::isfinite(phi1) || !std::isfinite(phi2)) {
      throw invalid_parameter_error("von_mises: parameters must be finite");
    }
    Generator g(Family::von_mises);
    g.p_ = {phi1, phi2};
    const double kappa = std::hypot(phi1, phi2);
    g.aux_ = {kappa, kappa > 0.0 ? frac(std::atan2(phi2, phi1) / two_pi) : 0.0};
    g.log_norm_ = log_i0(kappa);
    g.bessel_ratios_ = bessel_ratio_table(kappa);
    return g;
  }

  /* Staircase density with n equal bins of heights (2j-1)/n, j = 1..n. */
  static Generator piecewise_constant(int n) {
    if (n < 1) throw invalid_parameter_error("piecewise_constant: need n >= 1");
    Generator g(Family::piecewise_constant);
    g.p_ = {static_cast<double>(n), 0.0};
    return g;
  }

  static Generator mixture(double weight, Generator first, Generator second) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
      throw invalid_parameter_error("mixture: weight must lie in [0,1]");
    }
    Generator g(Family::mixture);
    g.p_ = {weight, 0.0};
    g.comp_[0] = std::make_shared<Generator>(std::move(first));
    g.comp_[1] = std::make_shared<Generator>(std::move(second));
    return g;
  }

  /* Histogram density on equal bins; values are renormalized to mean 1. */
  static Generator tabulated(std::vector<double> values) {
    if (values.empty()) throw invalid_parameter_error("tabulated: need at least one bin");
    double total = 0.0;
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw invalid_parameter_error("tabulated: bin values must be finite and >= 0");
      }
      total += v;
    }
    if (!(total > 0.0)) throw invalid_parameter_error("tabulated: all bins are zero");
    const double scale = static_cast<double>(values.size()) / total;
    for (double& v : values) v *= scale;
    Generator g(Family::tabulated);
    g.table_ = std::move(values);
    g.cum_.resize(g.table_.size() + 1, 0.0);
    const double w = 1.0 / static_cast<double>(g.table_.size());
    for (std::size_t k = 0; k < g.table_.size(); ++k) {
      g.cum_[k + 1] = g.cum_[k] + g.table_[k] * w;
    }
    g.cum_.back() = 1.0;
    return g;
  }

  /* ---- identity ---- */

  Family family() const { return family_; }

  std::vector<std::pair<std::string, double>> named_params() const {
    switch (family_) {
      case Family::uniform: return {};
      case Family::triangular: return {{"b", p_[0]}, {"m", p_[1]}};
      case Family::beta: return {{"alpha", p_[0]}, {"beta", p_[1]}};
      case Family::trunc_normal: return {{"mu", p_[0]}, {"sigma", p_[1]}};
      case Family::kumaraswamy: return {{"a", p_[0]}, {"b", p_[1]}};
      case Family::logit_normal: return {{"mu", p_[0]}, {"sigma", p_[1]}};
      case Family::von_mises: return {{"phi1", p_[0]}, {"phi2", p_[1]}};
      case Family::piecewise_constant: return {{"n", p_[0]}};
      case Family::mixture: return {{"weight", p_[0]}};
      case Family::tabulated: return {};
    }
    return {};
  }

  const Generator& component(int i) const {
    if (family_ != Family::mixture) throw dimension_error("component: not a mixture");
    return *comp_[i];
  }

  const std::vector<double>& table() const {
    if (family_ != Family::tabulated) throw dimension_error("table: not tabulated");
    return table_;
  }

  /* ---- evaluation ---- */

  double log_pdf(double x) const {
    check_domain(x);
    switch (family_) {
      case Family::uniform:
        return 0.0;
      case Family::triangular: {
        const double b = p_[0], m = p_[1];
        if (x <= m) return x > 0.0 ? std::log(2.0 * x / (b * m)) : -inf();
        if (x < b) return std::log(2.0 * (b - x) / (b * (b - m)));
        if (x == b && m == b) return std::log(2.0 / b);
        return -inf();
      }
      case Family::beta: {
        const double a = p_[0], b = p_[1];
        double t = -aux_[0];
        if (a != 1.0) t += (a - 1.0) * std::log(x);
        if (b != 1.0) t += (b - 1.0) * std::log1p(-x);
        return t;  // +inf at a singular endpoint is intentional
      }
      case Family::trunc_normal: {
        const double z = (x - p_[0]) / p_[1];
        return log_normal_pdf(z) - std::log(p_[1]) - std::log(aux_[1] - aux_[0]);
      }
      case Family::kumaraswamy: {
        const double a = p_[0], b = p_[1];
        if (x == 0.0) return a < 1.0 ? inf() : (a == 1.0 ? std::log(a * b) : -inf());
        if (x == 1.0) return b < 1.0 ? inf() : (b == 1.0 ? std::log(a * b) : -inf());
        const double la = std::log(x);
        return std::log(a * b) + (a - 1.0) * la + (b - 1.0) * std::log1p(-std::exp(a * la));
      }
      case Family::logit_normal: {
        if (x == 0.0 || x == 1.0) return -inf();
        const double z = (logit(x) - p_[0]) / p_[1];
        return log_normal_pdf(z) - std::log(p_[1]) - std::log(x) - std::log1p(-x);
      }
      case Family::von_mises:
        return p_[0] * std::cos(two_pi * x) + p_[1] * std::sin(two_pi * x) - log_norm_;
      case Family::piecewise_constant: {
        const int n = static_cast<int>(p_[0]);
        const int j = std::min(n - 1, static_cast<int>(x * n));
        return std::log((2.0 * j + 1.0) / n);
      }
      case Family::mixture: {
        const double w = p_[0];
        const double l1 = w > 0.0 ? std::log(w) + comp_[0]->log_pdf(x) : -inf();
        const double l2 = w < 1.0 ? std::log1p(-w) + comp_[1]->log_pdf(x) : -inf();
        const double hi = std::max(l1, l2);
        if (hi == -inf()) return hi;
        return hi + std::log1p(std::exp(std::min(l1, l2) - hi));
      }
      case Family::tabulated: {
        const std::size_t m = table_.size();
        const std::size_t j = std::min(m - 1, static_cast<std::size_t>(x * m));
        return table_[j] > 0.0 ? std::log(table_[j]) : -inf();
      }
    }
    return -inf();
  }

  double pdf(double x) const { return std::exp(log_pdf(x)); }

  double cdf(double x) const {
    if (x <= 0.0) {
      check_domain(x);
      return 0.0;
    }
    if (x >= 1.0) {
      check_domain(x);
      return 1.0;
    }
    switch (family_) {
      case Family::uniform:
        return x;
      case Family::triangular: {
        const double b = p_[0], m = p_[1];
        if (x <= m) return x * x / (b * m);
        if (x < b) return 1.0 - sq(b - x) / (b * (b - m));
        return 1.0;
      }
      case Family::beta:
        return reg_inc_beta(p_[0], p_[1], x);
      case Family::trunc_normal:
        return (normal_cdf((x - p_[0]) / p_[1]) - aux_[0]) / (aux_[1] - aux_[0]);
      case Family::kumaraswamy:
        return -std::expm1(p_[1] * std::log1p(-std::exp(p_[0] * std::log(x))));
      case Family::logit_normal:
        return normal_cdf((logit(x) - p_[0]) / p_[1]);
      case Family::von_mises: {
        const double mu = aux_[1];
        double s = 0.0;
        for (std::size_t k = bessel_ratios_.size(); k >= 1; --k) {
          s += bessel_ratios_[k - 1] / static_cast<double>(k) *
               (std::sin(two_pi * k * (x - mu)) + std::sin(two_pi * k * mu));
        }
        return clamp01(x + s / pi);
      }
      case Family::piecewise_constant: {
        const int n = static_cast<int>(p_[0]);
        const int j = std::min(n - 1, static_cast<int>(x * n));
        const double left = static_cast<double>(j) / n;
        return sq(static_cast<double>(j)) / sq(static_cast<double>(n)) +
               (2.0 * j + 1.0) / n * (x - left);
      }
      case Family::mixture:
        return p_[0] * comp_[0]->cdf(x) + (1.0 - p_[0]) * comp_[1]->cdf(x);
      case Family::tabulated: {
        const std::size_t m = table_.size();
        const std::size_t j = std::min(m - 1, static_cast<std::size_t>(x * m));
        return clamp01(cum_[j] + table_[j] * (x - static_cast<double>(j) / m));
      }
    }
    return 0.0;
  }

  /* Inverse cdf; closed form where the family admits one, else bisection. */
  double quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw domain_error("quantile: u outside [0,1]");
    if (u == 0.0 || u == 1.0) return invert_edge(u);
    switch (family_) {
      case Family::uniform:
        return u;
      case Family::triangular: {
        const double b = p_[0], m = p_[1];
        if (u <= m / b) return std::sqrt(u * b * m);
        return b - std::sqrt((1.0 - u) * b * (b - m));
      }
      case Family::beta:
        return reg_inc_beta_inv(p_[0], p_[1], u);
      case Family::trunc_normal: {
        const double p = aux_[0] + u * (aux_[1] - aux_[0]);
        const double safe = std::min(std::nextafter(1.0, 0.0), std::max(1e-300, p));
        return clamp01(p_[0] + p_[1] * normal_quantile(safe));
      }
      case Family::kumaraswamy:
        return std::exp(std::log1p(-std::exp(std::log1p(-u) / p_[1])) / p_[0]);
      case Family::logit_normal:
        return sigmoid(p_[0] + p_[1] * normal_quantile(u));
      case Family::piecewise_constant: {
        const int n = static_cast<int>(p_[0]);
        int j = static_cast<int>(std::sqrt(u) * n);
        while (j > 0 && sq(static_cast<double>(j)) / sq(static_cast<double>(n)) > u) --j;
        while (j + 1 < n && sq(static_cast<double>(j + 1)) / sq(static_cast<double>(n)) <= u) ++j;
        return static_cast<double>(j) / n +
               (u - sq(static_cast<double>(j)) / sq(static_cast<double>(n))) * n / (2.0 * j + 1.0);
      }
      case Family::tabulated: {
        const std::size_t m = table_.size();
        std::size_t j = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        j = (j == 0 ? 0 : j - 1);
        while (j + 1 < m && table_[j] <= 0.0) ++j;
        return static_cast<double>(j) / m + (u - cum_[j]) / table_[j];
      }
      default:
        return quantile_bisect(u);
    }
  }

  double sample_one(Rng& rng) const {
    if (family_ == Family::mixture) {
      const double u = rng.uniform();
      return u < p_[0] ? comp_[0]->sample_one(rng) : comp_[1]->sample_one(rng);
    }
    return quantile(rng.uniform_open());
  }

  std::vector<double> sample(Rng& rng, std::size_t n) const {
    std::vector<double> out(n);
    for (auto& x : out) x = sample_one(rng);
    return out;
  }

  /* ---- moments ----
   * All derived from cdf integrals, which stay bounded even when the density
   * is unbounded at the endpoints:
   *   E[X] = 1 - int F,  E[X^2] = 1 - 2 int x F,  E|X-X'| = 2 int F (1 - F).
   */
  GeneratorMoments moments() const {
    GeneratorMoments mo;
    if (family_ == Family::tabulated || family_ == Family::piecewise_constant) {
      const auto s = histogram_cdf_sums();
      mo.mean = 1.0 - s[0];
      mo.second_moment = 1.0 - 2.0 * s[1];
      mo.mean_abs_diff = 2.0 * (s[0] - s[2]);
    } else {
      const double tol = 1e-11;
      const auto cuts = cdf_kinks();
      mo.mean = 1.0 - integrate_split([this](double x) { return cdf(x); }, 0.0, 1.0, cuts, tol);
      mo.second_moment =
          1.0 - 2.0 * integrate_split([this](double x) { return x * cdf(x); }, 0.0, 1.0, cuts, tol);
      mo.mean_abs_diff = 2.0 * integrate_split(
                             [this](double x) {
                               const double F = cdf(x);
                               return F * (1.0 - F);
                             },
                             0.0, 1.0, cuts, tol);
    }
    mo.variance = mo.second_moment - sq(mo.mean);
    mo.e_x_1mx = mo.mean - mo.second_moment;
    return mo;
  }

  /* Raw moment E[X^j] for j in [0, 8]. */
  double raw_moment(int j) const {
    if (j < 0 || j > 8) throw dimension_error("raw_moment: order must lie in [0, 8]");
    if (j == 0) return 1.0;
    if (family_ == Family::tabulated || family_ == Family::piecewise_constant) {
      const std::size_t m = bin_count();
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double a = static_cast<double>(k) / m, b = static_cast<double>(k + 1) / m;
        s += bin_value(k) * (std::pow(b, j + 1) - std::pow(a, j + 1)) / (j + 1);
      }
      return s;
    }
    return 1.0 - j * integrate_split(
                     [this, j](double x) { return std::pow(x, j - 1) * cdf(x); }, 0.0, 1.0,
                     cdf_kinks(), 1e-11);
  }

  /* m-fold iterated antiderivative of the cdf evaluated at 1. */
  double antiderivative_at_one(int m) const {
    if (m < 0 || m > 8) throw dimension_error("antiderivative_at_one: order must lie in [0, 8]");
    double s = 0.0, sign = 1.0;
    for (int j = 0; j <= m; ++j) {
      s += sign * raw_moment(j) / (std::tgamma(j + 1.0) * std::tgamma(m - j + 1.0));
      sign = -sign;
    }
    return s;
  }

  /* Interior points of (0,1) where the pdf is not smooth (kinks or jumps);
   * capped at 64 so callers fall back to plain adaptive panels for very
   * fine histograms. */
  std::vector<double> kink_locations() const {
    switch (family_) {
      case Family::triangular:
        return {p_[1], p_[0]};
      case Family::piecewise_constant:
      case Family::tabulated: {
        const std::size_t n = bin_count();
        if (n > 64) return {};
        std::vector<double> cuts;
        for (std::size_t j = 1; j < n; ++j) {
          cuts.push_back(static_cast<double>(j) / static_cast<double>(n));
        }
        return cuts;
      }
      case Family::mixture: {
        auto a = comp_[0]->kink_locations();
        const auto b = comp_[1]->kink_locations();
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      default:
        return {};
    }
  }

  /* Interior points where the pdf itself is discontinuous (histogram bin
   * edges with unequal neighbours); same cap as kink_locations. */
  std::vector<double> jump_locations() const {
    switch (family_) {
      case Family::piecewise_constant:
      case Family::tabulated: {
        const std::size_t n = bin_count();
        if (n > 64) return {};
        std::vector<double> cuts;
        for (std::size_t j = 1; j < n; ++j) {
          if (bin_value(j - 1) != bin_value(j)) {
            cuts.push_back(static_cast<double>(j) / static_cast<double>(n));
          }
        }
        return cuts;
      }
      case Family::mixture: {
        auto a = comp_[0]->jump_locations();
        const auto b = comp_[1]->jump_locations();
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      default:
        return {};
    }
  }

  /* ---- reflection x -> 1 - x ---- */

  bool has_exact_reflection() const {
    switch (family_) {
      case Family::triangular:
      case Family::kumaraswamy:
        return false;
      case Family::mixture:
        return comp_[0]->has_exact_reflection() && comp_[1]->has_exact_reflection();
      default:
        return true;
    }
  }

  /* Density of 1 - X; exact for closed-under-reflection families, otherwise
   * a fine histogram (bin count chosen coprime to common grid sizes). */
  Generator reflected(int fallback_bins = 4001) const {
    switch (family_) {
      case Family::uniform:
        return uniform();
      case Family::beta:
        return beta(p_[1], p_[0]);
      case Family::trunc_normal:
        return trunc_normal(1.0 - p_[0], p_[1]);
      case Family::logit_normal:
        return logit_normal(-p_[0], p_[1]);
      case Family::von_mises:
        return von_mises(p_[0], -p_[1]);
      case Family::mixture:
        return mixture(p_[0], comp_[0]->reflected(fallback_bins),
                       comp_[1]->reflected(fallback_bins));
      case Family::tabulated: {
        std::vector<double> rev(table_.rbegin(), table_.rend());
        return tabulated(std::move(rev));
      }
      case Family::piecewise_constant: {
        const int n = static_cast<int>(p_[0]);
        std::vector<double> rev(n);
        for (int j = 0; j < n; ++j) rev[j] = (2.0 * (n - j) - 1.0) / n;
        return tabulated(std::move(rev));
      }
      default: {
        std::vector<double> vals(fallback_bins);
        for (int k = 0; k < fallback_bins; ++k) {
          vals[k] = pdf(1.0 - (k + 0.5) / fallback_bins);
        }
        return tabulated(std::move(vals));
      }
    }
  }

private:
  explicit Generator(Family f) : family_(f) {}

  static double inf() { return std::numeric_limits<double>::infinity(); }

  static void check_domain(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw domain_error("generator evaluation point outside [0,1]");
  }

  double invert_edge(double u) const {
    if (family_ == Family::triangular) return u == 0.0 ? 0.0 : p_[0];
    return u;  // all other supported families span [0,1] (possibly with zero tails)
  }

  double quantile_bisect(double u) const {
    double lo = 0.0, hi = 1.0;
    double flo = 0.0, fhi = 1.0;
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = cdf(mid);
      if (fm < flo - 1e-9 || fm > fhi + 1e-9) {
        throw numeric_error("quantile: cdf not monotone within bracket", hi - lo);
      }
      if (fm < u) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    return 0.5 * (lo + hi);
  }

  std::vector<double> cdf_kinks() const { return kink_locations(); }

  std::size_t bin_count() const {
    return family_ == Family::tabulated ? table_.size() : static_cast<std::size_t>(p_[0]);
  }

  double bin_value(std::size_t k) const {
    return family_ == Family::tabulated ? table_[k]
                                        : (2.0 * static_cast<double>(k) + 1.0) / p_[0];
  }

  /* Exact {int F, int x F, int F^2} for histogram densities. */
  std::array<double, 3> histogram_cdf_sums() const {
    const std::size_t m = bin_count();
    const double w = 1.0 / static_cast<double>(m);
    double c = 0.0, iF = 0.0, ixF = 0.0, iF2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double v = bin_value(k);
      const double a = static_cast<double>(k) * w;
      iF += c * w + v * w * w / 2.0;
      ixF += c * w * (a + w / 2.0) + v * (w * w * a / 2.0 + w * w * w / 3.0);
      iF2 += c * c * w + c * v * w * w + v * v * w * w * w / 3.0;
      c += v * w;
    }
    return {iF, ixF, iF2};
  }

  static std::vector<double> bessel_ratio_table(double kappa) {
    if (kappa < 1e-12) return {};
    // min in double first: the cast alone overflows int for huge concentrations
    const int kmax = static_cast<int>(
        std::min(6000.0, std::ceil(kappa + 9.0 * std::sqrt(kappa + 1.0) + 12.0)));
    std::vector<double> val(kmax + 2, 0.0);
    val[kmax] = 1e-280;
    for (int k = kmax; k >= 1; --k) {
      val[k - 1] = val[k + 1] + (2.0 * k / kappa) * val[k];
      if (val[k - 1] > 1e260) {
        for (int j = k - 1; j <= kmax + 1; ++j) val[j] *= 1e-260;
      }
    }
    std::vector<double> ratios;
    ratios.reserve(kmax);
    for (int k = 1; k <= kmax; ++k) {
      const double r = val[k] / val[0];
      if (r < 1e-18) break;
      ratios.push_back(r);
    }
    return ratios;
  }

  Family family_;
  std::array<double, 2> p_{0.0, 0.0};
  std::array<double, 2> aux_{0.0, 0.0};
  double log_norm_ = 0.0;
  std::vector<double> bessel_ratios_;
  std::vector<double> table_;
  std::vector<double> cum_;
  std::array<std::shared_ptr<const Generator>, 2> comp_;
};

/* ---- circular convolution ------------------------------------------------
 * Density of the wrapped combination of two independent draws:
 *   h(x) = int_0^1 f(s1 * x (+) s2 * y) g(y) dy
 * with signs s1 = (-1)^{r1}, s2 = (-1)^{r1 + sg2}; the resulting pair keeps
 * the family closed with combined orientation bits
 *   t = (r1 + r2 mod 2, sg1 + sg2 + 1 mod 2).
 */
struct StarProduct {
  Generator density;
  std::array<int, 2> signature;
};

inline StarProduct star_product(const Generator& f, std::array<int, 2> r, const Generator& g,
                                std::array<int, 2> s, int grid = 512) {
  for (int bit : {r[0], r[1], s[0], s[1]}) {
    if (bit != 0 && bit != 1) throw invalid_parameter_error("star_product: signature bits in {0,1}");
  }
  if (grid < 8) throw invalid_parameter_error("star_product: grid too small");
  const double sign_x = (r[0] == 0) ? 1.0 : -1.0;
  const double sign_y = ((r[0] + s[1]) % 2 == 0) ? 1.0 : -1.0;
  std::vector<double> vals(grid);
  for (int k = 0; k < grid; ++k) {
    const double x = (k + 0.5) / grid;
    const double xs = frac(sign_x * x);
    // the integrand in y wraps once; split there so panels stay smooth
    const double cut = sign_y > 0.0 ? 1.0 - xs : xs;
    vals[k] = integrate_split(
        [&](double y) { return f.pdf(frac(xs + sign_y * y)) * g.pdf(y); }, 0.0, 1.0, {cut}, 1e-9);
  }
  double total = 0.0;
  for (double v : vals) total += v;
  total /= grid;
  if (std::fabs(total - 1.0) > 1e-6) {
    throw numeric_error("star_product: grid density does not integrate to 1", std::fabs(total - 1.0));
  }
  return StarProduct{Generator::tabulated(std::move(vals)),
                     {(r[0] + r[1]) % 2, (s[0] + s[1] + 1) % 2}};
}

/*
 * Histogram approximation of a normalized mixture of wrapped inverse-sqrt
 * spikes: each shift q contributes (f_q^+ + f_q^-)/2 with
 * f_q^{+/-}(u) = 1 / (2 sqrt(frac(+/-(u + q)))).
 */
inline Generator wrapped_inv_sqrt_mixture(const std::vector<double>& shifts,
                                          const std::vector<double>& weights, int bins = 4096) {
  if (shifts.empty() || shifts.size() != weights.size()) {
    throw dimension_error("wrapped_inv_sqrt_mixture: shifts/weights mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw invalid_parameter_error("wrapped_inv_sqrt_mixture: negative weight");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw invalid_parameter_error("wrapped_inv_sqrt_mixture: zero weights");
  std::vector<double> vals(bins, 0.0);
  for (int k = 0; k < bins; ++k) {
    const double u = (k + 0.5) / bins;
    for (std::size_t j = 0; j < shifts.size(); ++j) {
      const double up = frac(u + shifts[j]);
      const double un = frac(-(u + shifts[j]));
      double v = 0.0;
      if (up > 0.0) v += 0.5 / (2.0 * std::sqrt(up));
      if (un > 0.0) v += 0.5 / (2.0 * std::sqrt(un));
      vals[k] += weights[j] / wsum * v;
    }
  }
  return Generator::tabulated(std::move(vals));
}

}  // namespace wrapcop
