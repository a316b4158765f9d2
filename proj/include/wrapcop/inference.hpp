#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wrapcop/concordance.hpp"
#include "wrapcop/copula.hpp"
#include "wrapcop/errors.hpp"
#include "wrapcop/generator.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/matrix.hpp"
#include "wrapcop/optimize.hpp"
#include "wrapcop/parallel.hpp"
#include "wrapcop/quadrature.hpp"
#include "wrapcop/rng.hpp"

namespace wrapcop {

enum class MarginProvenance { rank_based, parametric_margins, known_margins };

inline const char* margin_provenance_name(MarginProvenance p) {
  switch (p) {
    case MarginProvenance::rank_based: return "rank_based";
    case MarginProvenance::parametric_margins: return "parametric_margins";
    case MarginProvenance::known_margins: return "known_margins";
  }
  return "?";
}

struct PseudoObservations {
  Matrix u;
  MarginProvenance provenance = MarginProvenance::rank_based;
  bool tie_warning = false;
};

namespace detail {

inline bool has_adjacent_duplicate(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace detail

/* column-wise average ranks scaled by 1/(n+1) */
inline PseudoObservations pseudo_observations(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw data_error("pseudo_observations: need at least two rows");
  if (d < 1) throw dimension_error("pseudo_observations: need at least one column");
  PseudoObservations out{Matrix(n, d), MarginProvenance::rank_based, false};
  for (std::size_t j = 0; j < d; ++j) {
    const std::vector<double> col = x.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo == *hi) {
      throw data_error("pseudo_observations: column " + std::to_string(j) +
                       " is constant (degenerate margin)");
    }
    if (detail::has_adjacent_duplicate(col)) out.tie_warning = true;
    const std::vector<double> r = average_ranks(col);
    for (std::size_t i = 0; i < n; ++i) {
      out.u(i, j) = r[i] / static_cast<double>(n + 1);
    }
  }
  return out;
}

/* two-stage route: fit normal margins by MLE, then map through their cdf */
inline PseudoObservations parametric_normal_pseudo_observations(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw data_error("parametric_normal_pseudo_observations: need at least two rows");
  PseudoObservations out{Matrix(n, d), MarginProvenance::parametric_margins, false};
  for (std::size_t j = 0; j < d; ++j) {
    const std::vector<double> col = x.column(j);
    const double mu = mean_of(col);
    double ss = 0.0;
    for (double v : col) ss += (v - mu) * (v - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    if (!(sigma > 0.0)) {
      throw data_error("parametric_normal_pseudo_observations: column " + std::to_string(j) +
                       " is constant (degenerate margin)");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.u(i, j) = normal_cdf((x(i, j) - mu) / sigma);
    }
  }
  return out;
}

inline PseudoObservations known_margin_observations(Matrix u) {
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (!(u(i, j) >= 0.0 && u(i, j) < 1.0)) {
        throw domain_error("known_margin_observations: entries must lie in [0,1)");
      }
    }
  }
  return {std::move(u), MarginProvenance::known_margins, false};
}

inline std::vector<double> wrapped_sums(const PseudoObservations& obs, const Signature& t) {
  if (t.dim() != obs.u.cols()) {
    throw dimension_error("wrapped_sums: signature length must match the column count");
  }
  std::vector<double> y(obs.u.rows());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < t.dim(); ++j) {
      s += t.bit(j) ? 1.0 - obs.u(i, j) : obs.u(i, j);
    }
    y[i] = frac(s);
  }
  return y;
}

namespace detail {

inline double ks_sorted(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  double d = 0.0;
  for (std::size_t i = 1; i <= y.size(); ++i) {
    const double v = y[i - 1];
    d = std::max(d, std::fabs((static_cast<double>(i) - 1.0) / n - v));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - v));
  }
  return d;
}

inline double cvm_sorted(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  double s = 0.0;
  for (std::size_t i = 1; i <= y.size(); ++i) {
    const double t = y[i - 1] - static_cast<double>(i) / n + 0.5 / n;
    s += t * t;
  }
  return s / n + 1.0 / (12.0 * n * n);
}

}  // namespace detail

/* sup distance of the empirical cdf from uniform, by the order-statistic formula */
inline double ks_statistic(std::vector<double> y) {
  if (y.empty()) throw domain_error("ks_statistic: empty input");
  std::sort(y.begin(), y.end());
  return detail::ks_sorted(y);
}

inline double cvm_statistic(std::vector<double> y) {
  if (y.empty()) throw domain_error("cvm_statistic: empty input");
  std::sort(y.begin(), y.end());
  return detail::cvm_sorted(y);
}

enum class SelectionMethod { ks, cvm };

inline const char* selection_method_name(SelectionMethod m) {
  return m == SelectionMethod::ks ? "ks" : "cvm";
}

struct CandidateStat {
  Signature t;
  double ks = 0.0;
  double cvm = 0.0;
};

struct SignatureSelectionReport {
  Signature chosen;
  SelectionMethod method;
  std::vector<CandidateStat> table;  // all canonical candidates in lexicographic order
};

/*
 * Exhaustive scan of the 2^(d-1) canonical signature candidates; the winner
 * maximizes the chosen nonuniformity statistic of the wrapped sums.  Ties go
 * to the lexicographically smallest bit string.
 */
inline SignatureSelectionReport select_signature(const PseudoObservations& obs,
                                                 SelectionMethod method = SelectionMethod::ks,
                                                 int threads = 1) {
  const std::size_t d = obs.u.cols();
  if (d < 2) throw dimension_error("select_signature: need at least two columns");
  if (d > 20) throw dimension_error("select_signature: exhaustive search capped at d = 20");
  if (obs.u.rows() < 10) throw data_error("select_signature: need at least 10 rows");

  const std::size_t total = std::size_t{1} << (d - 1);
  const auto candidate_bits = [&](std::size_t index) {
    std::vector<int> bits(d, 0);
    for (std::size_t k = 0; k + 1 < d; ++k) {
      bits[k + 1] = static_cast<int>((index >> (d - 2 - k)) & 1U);
    }
    return bits;
  };

  std::vector<double> ks(total), cvm(total);
  parallel_for(total, threads, [&](std::size_t index) {
    std::vector<double> y = wrapped_sums(obs, Signature(candidate_bits(index)));
    std::sort(y.begin(), y.end());
    ks[index] = detail::ks_sorted(y);
    cvm[index] = detail::cvm_sorted(y);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i) {
    const double challenger = method == SelectionMethod::ks ? ks[i] : cvm[i];
    const double incumbent = method == SelectionMethod::ks ? ks[best] : cvm[best];
    if (challenger > incumbent) best = i;
  }

  std::vector<CandidateStat> table;
  table.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    table.push_back({Signature(candidate_bits(i)), ks[i], cvm[i]});
  }
  return {Signature(candidate_bits(best)), method, std::move(table)};
}

/*
 * Moments of X = (Z - shift) mod 1 when Z ~ g.  The cdf of X is an arc mass
 * of g starting at the shift point, so every moment reduces to univariate
 * integrals of that cdf.
 */
inline GeneratorMoments shifted_moments(const Generator& g, double shift) {
  const double a = frac(shift);
  if (a == 0.0) return g.moments();
  const double fa = g.cdf(a);
  const auto cdf_x = [&](double t) {
    const double w = a + t;
    return w <= 1.0 ? g.cdf(w) - fa : 1.0 - fa + g.cdf(w - 1.0);
  };
  std::vector<double> cuts{1.0 - a};
  for (double k : g.kink_locations()) cuts.push_back(frac(k - a));
  for (double k : g.jump_locations()) cuts.push_back(frac(k - a));
  GeneratorMoments mo;
  mo.mean = 1.0 - integrate_split([&](double t) { return cdf_x(t); }, 0.0, 1.0, cuts, 1e-10);
  mo.second_moment =
      1.0 - 2.0 * integrate_split([&](double t) { return t * cdf_x(t); }, 0.0, 1.0, cuts, 1e-10);
  mo.mean_abs_diff = 2.0 * integrate_split(
                               [&](double t) {
                                 const double f = cdf_x(t);
                                 return f * (1.0 - f);
                               },
                               0.0, 1.0, cuts, 1e-10);
  mo.variance = mo.second_moment - mo.mean * mo.mean;
  mo.e_x_1mx = mo.mean - mo.second_moment;
  return mo;
}

/*
 * A fittable generator family: a smooth bijection from R^k onto the natural
 * parameter region (log for positive parameters, logit for bounded ones), so
 * the simplex search never leaves the feasible set.
 */
class FitFamily {
 public:
  using Params = std::vector<std::pair<std::string, double>>;

  static FitFamily beta() {
    FitFamily f("beta", 2);
    f.build_ = [](std::span<const double> x) {
      return Generator::beta(std::exp(x[0]), std::exp(x[1]));
    };
    f.params_ = [](std::span<const double> x) {
      return Params{{"alpha", std::exp(x[0])}, {"beta", std::exp(x[1])}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{std::log(p[0]), std::log(p[1])};
    };
    return f;
  }

  static FitFamily trunc_normal() {
    FitFamily f("trunc_normal", 2);
    f.build_ = [](std::span<const double> x) {
      return Generator::trunc_normal(x[0], std::exp(x[1]));
    };
    f.params_ = [](std::span<const double> x) {
      return Params{{"mu", x[0]}, {"sigma", std::exp(x[1])}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{p[0], std::log(p[1])};
    };
    return f;
  }

  static FitFamily kumaraswamy() {
    FitFamily f("kumaraswamy", 2);
    f.build_ = [](std::span<const double> x) {
      return Generator::kumaraswamy(std::exp(x[0]), std::exp(x[1]));
    };
    f.params_ = [](std::span<const double> x) {
      return Params{{"a", std::exp(x[0])}, {"b", std::exp(x[1])}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{std::log(p[0]), std::log(p[1])};
    };
    return f;
  }

  static FitFamily logit_normal() {
    FitFamily f("logit_normal", 2);
    f.build_ = [](std::span<const double> x) {
      return Generator::logit_normal(x[0], std::exp(x[1]));
    };
    f.params_ = [](std::span<const double> x) {
      return Params{{"mu", x[0]}, {"sigma", std::exp(x[1])}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{p[0], std::log(p[1])};
    };
    return f;
  }

  static FitFamily von_mises() {
    FitFamily f("von_mises", 2);
    f.build_ = [](std::span<const double> x) { return Generator::von_mises(x[0], x[1]); };
    f.params_ = [](std::span<const double> x) {
      return Params{{"phi1", x[0]}, {"phi2", x[1]}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{p[0], p[1]};
    };
    return f;
  }

  static FitFamily triangular() {
    FitFamily f("triangular", 2);
    f.build_ = [](std::span<const double> x) {
      const double b = sigmoid(x[0]);
      return Generator::triangular(b, b * sigmoid(x[1]));
    };
    f.params_ = [](std::span<const double> x) {
      const double b = sigmoid(x[0]);
      return Params{{"b", b}, {"m", b * sigmoid(x[1])}};
    };
    f.unconstrain_ = [](std::span<const double> p) {
      return std::vector<double>{logit(p[0]), logit(p[1] / p[0])};
    };
    return f;
  }

  static FitFamily uniform() {
    FitFamily f("uniform", 0);
    f.build_ = [](std::span<const double>) { return Generator::uniform(); };
    f.params_ = [](std::span<const double>) { return Params{}; };
    f.unconstrain_ = [](std::span<const double>) { return std::vector<double>{}; };
    return f;
  }

  /* two-component mixture: weight plus both component parameter blocks */
  static FitFamily mixture(FitFamily first, FitFamily second) {
    const int dim = 1 + first.dim_ + second.dim_;
    if (dim > 5) {
      throw invalid_parameter_error("FitFamily::mixture: at most 5 free parameters");
    }
    FitFamily f(first.name_ + "+" + second.name_, dim);
    auto pa = std::make_shared<const FitFamily>(std::move(first));
    auto pb = std::make_shared<const FitFamily>(std::move(second));
    const std::size_t ka = static_cast<std::size_t>(pa->dim_);
    f.build_ = [pa, pb, ka](std::span<const double> x) {
      return Generator::mixture(sigmoid(x[0]), pa->build(x.subspan(1, ka)),
                                pb->build(x.subspan(1 + ka)));
    };
    f.params_ = [pa, pb, ka](std::span<const double> x) {
      Params out{{"weight", sigmoid(x[0])}};
      for (const auto& [k, v] : pa->named_parameters(x.subspan(1, ka))) {
        out.emplace_back(k + "_1", v);
      }
      for (const auto& [k, v] : pb->named_parameters(x.subspan(1 + ka))) {
        out.emplace_back(k + "_2", v);
      }
      return out;
    };
    f.unconstrain_ = [pa, pb, ka](std::span<const double> p) {
      std::vector<double> out{logit(p[0])};
      for (double v : pa->unconstrain(p.subspan(1, ka))) out.push_back(v);
      for (double v : pb->unconstrain(p.subspan(1 + ka))) out.push_back(v);
      return out;
    };
    f.components_ = {pa, pb};
    return f;
  }

  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }

  Generator build(std::span<const double> x) const {
    check_dim(x.size());
    return build_(x);
  }

  Params named_parameters(std::span<const double> x) const {
    check_dim(x.size());
    return params_(x);
  }

  std::vector<double> unconstrain(std::span<const double> natural) const {
    check_dim(natural.size());
    return unconstrain_(natural);
  }

  /* order equal-family mixture components by median to fix label switching */
  std::vector<double> canonical(std::span<const double> x) const {
    check_dim(x.size());
    std::vector<double> out(x.begin(), x.end());
    const auto& [pa, pb] = components_;
    if (!pa || pa->name_ != pb->name_) return out;
    const std::size_t ka = static_cast<std::size_t>(pa->dim_);
    const Generator a = pa->build(x.subspan(1, ka));
    const Generator b = pb->build(x.subspan(1 + ka));
    try {
      if (a.quantile(0.5) <= b.quantile(0.5)) return out;
    } catch (const std::exception&) {
      return out;  // a degenerate component defeats the median; keep the given order
    }
    out[0] = -x[0];
    std::copy(x.begin() + 1 + static_cast<std::ptrdiff_t>(ka), x.end(), out.begin() + 1);
    std::copy(x.begin() + 1, x.begin() + 1 + static_cast<std::ptrdiff_t>(ka),
              out.end() - static_cast<std::ptrdiff_t>(ka));
    return out;
  }

 private:
  FitFamily(std::string name, int dim) : name_(std::move(name)), dim_(dim) {}

  void check_dim(std::size_t got) const {
    if (got != static_cast<std::size_t>(dim_)) {
      throw dimension_error("FitFamily " + name_ + ": expected " + std::to_string(dim_) +
                            " coordinates, got " + std::to_string(got));
    }
  }

  std::string name_;
  int dim_;
  std::function<Generator(std::span<const double>)> build_;
  std::function<Params(std::span<const double>)> params_;
  std::function<std::vector<double>(std::span<const double>)> unconstrain_;
  std::pair<std::shared_ptr<const FitFamily>, std::shared_ptr<const FitFamily>> components_;
};

/* the five unimodal candidate families used by the data pipeline */
inline std::vector<FitFamily> unimodal_families() {
  return {FitFamily::beta(), FitFamily::trunc_normal(), FitFamily::kumaraswamy(),
          FitFamily::logit_normal(), FitFamily::von_mises()};
}

/* all 15 unordered (with repetition) two-component mixtures of the five */
inline std::vector<FitFamily> mixture_families() {
  const std::vector<FitFamily> base = unimodal_families();
  std::vector<FitFamily> out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i; j < base.size(); ++j) {
      out.push_back(FitFamily::mixture(base[i], base[j]));
    }
  }
  return out;
}

struct FitOptions {
  Signature signature = Signature({0, 1});  // orientation used for the plug-in measures
  double shift = 0.0;       // amount that was added (mod 1) to the data before fitting
  int multistarts = 8;
  double start_radius = 3.0;
  SimplexOptions simplex = {};
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> reference_start;  // natural-scale extra start
};

struct FitReport {
  std::string family;
  std::vector<std::pair<std::string, double>> parameters;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double xi = 0.0;
  bool converged = false;
  bool boundary_warning = false;
  int iterations = 0;
  Generator fitted = Generator::uniform();
};

inline bool reparam_boundary(std::span<const double> x) {
  for (double v : x) {
    if (std::fabs(v) > 10.0) return true;
  }
  return false;
}

/*
 * Maximum likelihood over the reparameterized family by multi-start
 * Nelder-Mead.  The non-convergence flag means no start improved on the
 * flat-density log-likelihood of zero.
 */
inline FitReport fit_parametric(std::span<const double> y, const FitFamily& family,
                                const FitOptions& opts = {}) {
  if (y.size() < 10) throw data_error("fit_parametric: need at least 10 observations");
  for (double v : y) {
    if (!(v >= 0.0 && v < 1.0)) throw domain_error("fit_parametric: data must lie in [0,1)");
  }
  if (opts.signature.dim() != 2) {
    throw invalid_parameter_error("fit_parametric: plug-in measures use a bivariate signature");
  }
  if (opts.multistarts < 1 || !(opts.start_radius > 0.0)) {
    throw invalid_parameter_error("fit_parametric: bad start configuration");
  }

  const int k = family.dimension();
  const double inf = std::numeric_limits<double>::infinity();
  const auto negative_ll = [&](std::span<const double> x) -> double {
    try {
      const Generator g = family.build(x);
      double s = 0.0;
      for (double v : y) s += g.log_pdf(v);
      return std::isfinite(s) ? -s : inf;
    } catch (const std::exception&) {
      return inf;
    }
  };

  static constexpr unsigned kPrimes[5] = {2, 3, 5, 7, 11};
  Rng rng(opts.seed, 0x5eed);
  std::vector<double> offset(static_cast<std::size_t>(k));
  for (double& o : offset) o = rng.uniform();

  std::vector<std::vector<double>> starts;
  for (int s = 0; s < opts.multistarts; ++s) {
    std::vector<double> x(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      const double q = frac(halton(static_cast<std::uint64_t>(s) + 1, kPrimes[j]) + offset[j]);
      x[static_cast<std::size_t>(j)] = opts.start_radius * (2.0 * q - 1.0);
    }
    starts.push_back(std::move(x));
  }
  if (opts.reference_start) starts.push_back(family.unconstrain(*opts.reference_start));

  SimplexResult best;
  for (const auto& x0 : starts) {
    SimplexResult r = nelder_mead(negative_ll, x0, 0.5, opts.simplex);
    if (best.x.empty() && best.iterations == 0) {
      best = std::move(r);
    } else if (r.value < best.value) {
      best = std::move(r);
    }
  }

  const std::vector<double> x = family.canonical(best.x);
  FitReport report;
  report.family = family.name();
  report.parameters = family.named_parameters(x);
  report.log_likelihood = -best.value;
  report.aic = 2.0 * static_cast<double>(k) - 2.0 * report.log_likelihood;
  report.iterations = best.iterations;
  report.converged = k == 0 || report.log_likelihood > 0.0;
  report.boundary_warning = reparam_boundary(x);
  if (std::isfinite(report.log_likelihood)) {
    report.fitted = family.build(x);
    try {
      const GeneratorMoments mo =
          opts.shift == 0.0 ? report.fitted.moments() : shifted_moments(report.fitted, opts.shift);
      const ConcordanceReport c =
          concordance_from_moments(mo, opts.signature.parity() ? -1 : 1);
      report.rho = c.rho;
      report.tau = c.tau;
      report.xi = c.xi;
    } catch (const std::exception&) {
      // Extreme fitted parameters can defeat the moment quadrature; keep the
      // fit but mark the plug-in measures unavailable.
      report.rho = report.tau = report.xi = std::numeric_limits<double>::quiet_NaN();
      report.boundary_warning = true;
    }
  } else {
    report.converged = false;
  }
  return report;
}

struct KdeEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  bool circular = false;
  std::string kernel = "gaussian";
};

inline double silverman_bandwidth(std::span<const double> y) {
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_sd(y);
  const double iqr = sorted_iqr(sorted);
  const double scale = std::min(sd, iqr / 1.34);
  if (!(scale > 0.0)) throw domain_error("silverman_bandwidth: degenerate spread");
  return 0.9 * scale * std::pow(static_cast<double>(y.size()), -0.2);
}

/*
 * Gaussian-kernel density estimate on an equispaced grid over [0,1].  The
 * plain kernel lets mass leak past the endpoints; circular mode folds it
 * back by summing the kernel images at y-1, y, y+1.
 */
inline KdeEstimate fit_kde(std::span<const double> y,
                           std::optional<double> bandwidth = std::nullopt, int grid_size = 200,
                           bool circular = false) {
  if (y.size() < 10) throw data_error("fit_kde: need at least 10 observations");
  for (double v : y) {
    if (!(v >= 0.0 && v <= 1.0)) throw domain_error("fit_kde: data must lie in [0,1]");
  }
  if (grid_size < 2) throw invalid_parameter_error("fit_kde: grid_size must be at least 2");
  if (bandwidth && !(*bandwidth > 0.0)) throw domain_error("fit_kde: bandwidth must be positive");

  KdeEstimate est;
  est.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(y);
  est.circular = circular;
  est.grid.resize(static_cast<std::size_t>(grid_size));
  est.values.resize(static_cast<std::size_t>(grid_size));
  const double h = est.bandwidth;
  const double norm = 1.0 / (static_cast<double>(y.size()) * h);
  for (int g = 0; g < grid_size; ++g) {
    const double xg = static_cast<double>(g) / static_cast<double>(grid_size - 1);
    double s = 0.0;
    for (double v : y) {
      s += normal_pdf((xg - v) / h);
      if (circular) {
        s += normal_pdf((xg - v + 1.0) / h);
        s += normal_pdf((xg - v - 1.0) / h);
      }
    }
    est.grid[static_cast<std::size_t>(g)] = xg;
    est.values[static_cast<std::size_t>(g)] = norm * s;
  }
  return est;
}

/* trapezoid integral of the estimate over its grid */
inline double kde_mass(const KdeEstimate& est) {
  double s = 0.0;
  for (std::size_t i = 1; i < est.grid.size(); ++i) {
    s += 0.5 * (est.values[i] + est.values[i - 1]) * (est.grid[i] - est.grid[i - 1]);
  }
  return s;
}

/* trapezoid integrated squared error against a reference density */
inline double kde_ise(const KdeEstimate& est, const Generator& truth) {
  double s = 0.0;
  std::vector<double> diff(est.grid.size());
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double d = est.values[i] - truth.pdf(est.grid[i]);
    diff[i] = d * d;
  }
  for (std::size_t i = 1; i < est.grid.size(); ++i) {
    s += 0.5 * (diff[i] + diff[i - 1]) * (est.grid[i] - est.grid[i - 1]);
  }
  return s;
}

/* count local maxima whose topographic prominence reaches the threshold */
inline int count_modes(const KdeEstimate& est, double min_prominence) {
  const auto& v = est.values;
  if (v.size() < 3) return 0;
  int modes = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool left_ok = i == 0 || v[i] > v[i - 1];
    const bool right_ok = i + 1 == v.size() || v[i] >= v[i + 1];
    if (!(left_ok && right_ok)) continue;
    double low = v[i];
    double left_base = v[i];
    for (std::size_t j = i; j-- > 0;) {
      low = std::min(low, v[j]);
      if (v[j] > v[i]) break;
    }
    left_base = low;
    low = v[i];
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      low = std::min(low, v[j]);
      if (v[j] > v[i]) break;
    }
    const double prominence = v[i] - std::max(left_base, low);
    if (prominence >= min_prominence) ++modes;
  }
  return modes;
}

inline double empirical_copula(const PseudoObservations& obs, std::span<const double> u) {
  if (u.size() != obs.u.cols()) {
    throw dimension_error("empirical_copula: point dimension must match the column count");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < obs.u.rows(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (obs.u(i, j) > u[j]) {
        all = false;
        break;
      }
    }
    if (all) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(obs.u.rows());
}

/*
 * Smoothed rank-based copula density: the average over observations of
 * products of beta densities with rank-determined shapes.
 */
inline double empirical_beta_density(const PseudoObservations& obs, std::span<const double> u) {
  if (obs.provenance != MarginProvenance::rank_based) {
    throw data_error("empirical_beta_density: requires rank-based pseudo-observations");
  }
  if (u.size() != obs.u.cols()) {
    throw dimension_error("empirical_beta_density: point dimension must match the column count");
  }
  for (double v : u) {
    if (!(v > 0.0 && v < 1.0)) {
      throw domain_error("empirical_beta_density: point must be interior");
    }
  }
  const std::size_t n = obs.u.rows(), d = obs.u.cols();
  const double np1 = static_cast<double>(n + 1);
  std::vector<double> lu(d), l1u(d);
  for (std::size_t j = 0; j < d; ++j) {
    lu[j] = std::log(u[j]);
    l1u[j] = std::log1p(-u[j]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double lp = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double r = obs.u(i, j) * np1;  // rank, possibly averaged under ties
      lp += (r - 1.0) * lu[j] + (np1 - r - 1.0) * l1u[j] - log_beta_fn(r, np1 - r);
    }
    total += std::exp(lp);
  }
  return total / static_cast<double>(n);
}

}  // namespace wrapcop
