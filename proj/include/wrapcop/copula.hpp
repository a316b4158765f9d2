#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "wrapcop/errors.hpp"
#include "wrapcop/generator.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/matrix.hpp"
#include "wrapcop/quadrature.hpp"
#include "wrapcop/rng.hpp"

namespace wrapcop {

/*
 * Orientation bits of the model, one per coordinate: bit j = 1 means
 * coordinate j enters the wrapped sum as 1 - u_j instead of u_j.
 * The family is over-parameterized: flipping every bit and reflecting the
 * generator yields the same copula, so bit 0 = 0 is the canonical form.
 */
class Signature {
public:
  explicit Signature(std::vector<int> bits) : bits_(std::move(bits)) {
    if (bits_.size() < 2) throw dimension_error("signature needs at least 2 bits");
    if (bits_.size() > 32) throw dimension_error("signature dimension capped at 32");
    for (int b : bits_) {
      if (b != 0 && b != 1) throw invalid_parameter_error("signature bits must be 0 or 1");
    }
  }

  int dim() const { return static_cast<int>(bits_.size()); }
  const std::vector<int>& bits() const { return bits_; }
  int bit(int j) const { return bits_[static_cast<std::size_t>(j)]; }
  bool is_canonical() const { return bits_[0] == 0; }

  Signature flipped() const {
    std::vector<int> f(bits_);
    for (int& b : f) b = 1 - b;
    return Signature(std::move(f));
  }

  int parity() const {
    int s = 0;
    for (int b : bits_) s += b;
    return s % 2;
  }

  friend bool operator==(const Signature&, const Signature&) = default;

private:
  std::vector<int> bits_;
};

inline Signature canonical_signature(const Signature& s) {
  return s.is_canonical() ? s : s.flipped();
}

struct CdfEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct TailRatio {
  double lower = 0.0;
  double upper = 0.0;
};

/*
 * The copula whose density is f evaluated at the wrapped sum of the
 * (possibly reflected) coordinates. Immutable after construction; the
 * Fourier-coefficient cache is shared across copies and written once.
 */
class CopulaModel {
public:
  CopulaModel(Generator f, Signature s)
      : generator_(std::move(f)),
        signature_(std::move(s)),
        char_cache_(std::make_shared<CharCache>()) {
    if (!signature_.is_canonical()) {
      signature_ = signature_.flipped();
      generator_ = generator_.reflected();
    }
  }

  int dim() const { return signature_.dim(); }
  const Generator& generator() const { return generator_; }
  const Signature& signature() const { return signature_; }

  /* (-1)^(sum of signature bits); the concordance sign for d = 2. */
  int sign_factor() const { return signature_.parity() == 0 ? 1 : -1; }

  double density(std::span<const double> u) const {
    check_point(u);
    const int d = dim();
    std::array<double, 32> ut{};
    for (int j = 0; j < d; ++j) ut[j] = signature_.bit(j) ? 1.0 - u[j] : u[j];
    // summing in sorted order makes the value exactly permutation invariant
    // for exchangeable (all-equal-bit) signatures
    std::sort(ut.begin(), ut.begin() + d);
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += ut[j];
    return generator_.pdf(frac(s));
  }

  Matrix sample(Rng& rng, std::size_t n) const {
    if (n == 0) throw invalid_parameter_error("sample: n must be positive");
    const int d = dim();
    Matrix out(n, static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j + 1 < d; ++j) {
        const double u = rng.uniform();
        out(i, static_cast<std::size_t>(j)) = u;
        acc += signature_.bit(j) ? 1.0 - u : u;
      }
      const double x = generator_.sample_one(rng);
      const double w = x - acc;
      out(i, static_cast<std::size_t>(d - 1)) = frac(signature_.bit(d - 1) ? -w : w);
    }
    return out;
  }

  double cdf(std::span<const double> u) const { return cdf_estimate(u).value; }

  CdfEstimate cdf_estimate(std::span<const double> u) const {
    check_point(u);
    const int d = dim();
    if (d > 6) throw dimension_error("cdf supports dimension <= 6");
    for (int j = 0; j < d; ++j) {
      if (u[j] == 0.0) return {0.0, 0.0};
    }
    // coordinates at 1 marginalize out, and every proper-subset margin of
    // the family is the independence copula
    std::vector<int> active;
    for (int j = 0; j < d; ++j) {
      if (u[j] < 1.0) active.push_back(j);
    }
    if (static_cast<int>(active.size()) < d) {
      double p = 1.0;
      for (int j : active) p *= u[j];
      return {p, 0.0};
    }
    if (d == 2) return {cdf_bivariate(u[0], u[1]), 1e-10};
    return cdf_qmc(u);
  }

  /*
   * dC/du_j as a function of the remaining coordinates, i.e. the
   * conditional cdf of U_{-j} given U_j; closed form for d = 2, reduced
   * quadrature above.
   */
  double partial_derivative(int j, std::span<const double> u) const {
    check_point(u);
    const int d = dim();
    if (j < 0 || j >= d) throw dimension_error("partial_derivative: coordinate out of range");
    if (u[j] <= 0.0 || u[j] >= 1.0) {
      throw domain_error("partial_derivative: differentiated coordinate must be interior");
    }
    if (d == 2) {
      const int k = 1 - j;
      const double a = signature_.bit(j) ? 1.0 - u[j] : u[j];
      const double val = signature_.bit(k) ? 1.0 - phase_mass(a, 1.0 - u[k])
                                           : phase_mass(a, u[k]);
      return clamp01(val);
    }
    // d >= 3: integrate the density over [0, u_l] for l != j with the last
    // such coordinate folded in closed form
    const int inner = (j == d - 1) ? d - 2 : d - 1;
    std::vector<int> outer;
    for (int l = 0; l < d; ++l) {
      if (l != j && l != inner) outer.push_back(l);
    }
    const double aj = signature_.bit(j) ? 1.0 - u[j] : u[j];
    const auto inner_value = [&](double phase) {
      return signature_.bit(inner) ? 1.0 - phase_mass(phase, 1.0 - u[inner])
                                   : phase_mass(phase, u[inner]);
    };
    double vol = 1.0;
    for (int l : outer) vol *= u[l];
    if (outer.size() == 1) {
      const int l = outer.front();
      const double val = integrate(
          [&](double v) {
            const double tv = signature_.bit(l) ? 1.0 - v : v;
            return inner_value(frac(aj + tv));
          },
          0.0, u[l], 1e-9);
      return clamp01(val);
    }
    const auto est = qmc_mean(
        static_cast<int>(outer.size()),
        [&](const std::vector<double>& x) {
          double s = aj;
          for (std::size_t m = 0; m < outer.size(); ++m) {
            const int l = outer[m];
            const double v = u[l] * x[m];
            s += signature_.bit(l) ? 1.0 - v : v;
          }
          return inner_value(frac(s));
        },
        8192, 8);
    return clamp01(vol * est.value);
  }

  /*
   * Characteristic function of the model by its Fourier series: the k-th
   * term couples the generator coefficient at frequency -2*pi*k with a
   * product of uniform characteristic-function factors, one per coordinate.
   */
  std::complex<double> char_function(std::span<const double> t, int K) const {
    if (static_cast<int>(t.size()) != dim()) {
      throw dimension_error("char_function: point dimension mismatch");
    }
    if (K < 0 || K > kMaxCharTerms) {
      throw invalid_parameter_error("char_function: K must lie in [0, 256]");
    }
    ensure_char_coeffs();
    const auto& c = char_cache_->coeffs;
    std::complex<double> total = 0.0;
    for (int k = -K; k <= K; ++k) {
      const std::complex<double> coef = (k >= 0) ? c[static_cast<std::size_t>(k)]
                                                 : std::conj(c[static_cast<std::size_t>(-k)]);
      std::complex<double> prod = coef;
      for (int j = 0; j < dim(); ++j) {
        const double sgn = signature_.bit(j) ? -1.0 : 1.0;
        prod *= phi_one(t[j] + sgn * two_pi * k);
      }
      total += prod;
    }
    return total;
  }

  /* Joint survival probability P(U > u) by inclusion-exclusion; proper
   * subset margins reduce to products. */
  double survival(std::span<const double> u) const {
    check_point(u);
    const int d = dim();
    if (d > 4) throw dimension_error("survival supports dimension <= 4");
    const unsigned full = (1u << d) - 1u;
    double total = 0.0;
    for (unsigned mask = 0; mask <= full; ++mask) {
      const int bits = std::popcount(mask);
      const double sgn = (bits % 2 == 0) ? 1.0 : -1.0;
      double val;
      if (mask == full) {
        val = cdf(u);
      } else {
        val = 1.0;
        for (int j = 0; j < d; ++j) {
          if (mask & (1u << j)) val *= u[j];
        }
      }
      total += sgn * val;
    }
    return std::max(0.0, total);
  }

  /* Corner mass ratios: lower = C(t,..,t)/t and the mirrored upper ratio
   * P(all U_j > 1-t)/t; both vanish as t -> 0 when the copula has no tail
   * dependence. */
  TailRatio tail_ratio(double t) const {
    if (!(t > 0.0 && t < 0.5)) throw domain_error("tail_ratio: t must lie in (0, 1/2)");
    if (dim() > 4) throw dimension_error("tail_ratio supports dimension <= 4");
    const std::vector<double> lo(static_cast<std::size_t>(dim()), t);
    const std::vector<double> hi(static_cast<std::size_t>(dim()), 1.0 - t);
    return {cdf(lo) / t, survival(hi) / t};
  }

  /* Mass of the generator along an arc of length y starting at phase a:
   * the integral of f(a (+) v) for v in [0, y]. */
  double phase_mass(double a, double y) const {
    if (a >= 1.0) a -= 1.0;  // phase is a circle coordinate
    const double w = frac(a + y);
    double g = generator_.cdf(w) - generator_.cdf(a);
    // the arc covers the wrap point when a + y reaches 1 (equality included:
    // frac then restarts at 0 and the full mass must be restored)
    if (a + y >= 1.0 && y > 0.0) g += 1.0;
    return g;
  }

private:
  static constexpr int kMaxCharTerms = 256;

  struct CharCache {
    std::once_flag flag;
    std::vector<std::complex<double>> coeffs;
  };

  void check_point(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dim()) {
      throw dimension_error("point dimension does not match the model");
    }
    for (double v : u) {
      if (!(v >= 0.0 && v <= 1.0)) throw domain_error("point coordinates must lie in [0,1]");
    }
  }

  /* Characteristic function of Unif(0,1) written in its cancellation-free
   * half-angle form. */
  static std::complex<double> phi_one(double x) {
    const double h = 0.5 * x;
    const double s = (h == 0.0) ? 1.0 : std::sin(h) / h;
    return std::complex<double>(std::cos(h) * s, std::sin(h) * s);
  }

  double cdf_bivariate(double u1, double u2) const {
    // integrate the closed-form conditional over the first coordinate;
    // the integrand has a kink where the wrapped sum crosses 1 and inherits
    // the generator's own kinks
    const double y = signature_.bit(1) ? 1.0 - u2 : u2;
    std::vector<double> cuts{1.0 - y};
    for (double a : generator_.kink_locations()) {
      cuts.push_back(frac(a - y));
      cuts.push_back(a);
    }
    const double val = integrate_split(
        [&](double v) {
          const double g = phase_mass(v, y);
          return signature_.bit(1) ? 1.0 - g : g;
        },
        0.0, u1, std::move(cuts), 1e-10);
    return clamp01(val);
  }

  CdfEstimate cdf_qmc(std::span<const double> u) const {
    const int d = dim();
    double vol = 1.0;
    for (int j = 0; j + 1 < d; ++j) vol *= u[j];
    const auto est = qmc_mean(
        d - 1,
        [&](const std::vector<double>& x) {
          double s = 0.0;
          for (int j = 0; j + 1 < d; ++j) {
            const double v = u[j] * x[static_cast<std::size_t>(j)];
            s += signature_.bit(j) ? 1.0 - v : v;
          }
          const double a = frac(s);
          return signature_.bit(d - 1) ? 1.0 - phase_mass(a, 1.0 - u[d - 1])
                                       : phase_mass(a, u[d - 1]);
        },
        8192, 8);
    return {clamp01(vol * est.value), vol * est.std_error};
  }

  void ensure_char_coeffs() const {
    std::call_once(char_cache_->flag, [this] {
      auto& c = char_cache_->coeffs;
      c.assign(kMaxCharTerms + 1, std::complex<double>(0.0, 0.0));
      c[0] = 1.0;  // the density integrates to one
      const auto kinks = generator_.kink_locations();
      for (int k = 1; k <= kMaxCharTerms; ++k) {
        std::vector<double> cuts(kinks);
        for (int j = 1; j < k; ++j) {
          cuts.push_back(static_cast<double>(j) / static_cast<double>(k));
        }
        const double w = two_pi * static_cast<double>(k);
        const double re = integrate_split(
            [&](double x) { return generator_.pdf(x) * std::cos(w * x); }, 0.0, 1.0, cuts, 1e-10);
        const double im = -integrate_split(
            [&](double x) { return generator_.pdf(x) * std::sin(w * x); }, 0.0, 1.0,
            std::move(cuts), 1e-10);
        c[static_cast<std::size_t>(k)] = {re, im};
      }
    });
  }

  Generator generator_;
  Signature signature_;
  std::shared_ptr<CharCache> char_cache_;
};

}  // namespace wrapcop
