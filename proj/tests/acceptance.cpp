// Release gate: twelve numbered end-to-end checks, each printing one
// summary line.  Tolerances and seeds are pinned here on purpose — a change
// in any of them is a deliberate release decision, not a refactor.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "wrapcop/concordance.hpp"
#include "wrapcop/copula.hpp"
#include "wrapcop/experiments.hpp"
#include "wrapcop/generator.hpp"
#include "wrapcop/inference.hpp"
#include "wrapcop/math.hpp"
#include "wrapcop/matrix.hpp"
#include "wrapcop/rng.hpp"

using namespace wrapcop;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

void report(int index, const std::string& label, const Outcome& out) {
  std::ostringstream line;
  line << "criterion " << std::setw(2) << std::setfill('0') << index << ' '
       << (out.ok ? "[PASS] " : "[FAIL] ") << label;
  if (!out.detail.empty()) line << " (" << out.detail << ")";
  std::cout << line.str() << std::endl;
}

template <typename Fn>
void run_criterion(int index, const std::string& label, Fn&& body) {
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  report(index, label, out);
  CHECK(out.ok);
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

Generator quarters_mixture() {
  return Generator::mixture(0.25, Generator::trunc_normal(0.25, 0.1),
                            Generator::trunc_normal(0.75, 0.1));
}

std::vector<Generator> release_battery() {
  return {Generator::uniform(),
          Generator::triangular(1.0, 1.0),
          Generator::beta(1.5, 1.5),
          Generator::beta(2.0, 5.0),
          Generator::trunc_normal(0.5, 0.1),
          Generator::von_mises(2.0, 1.0),
          quarters_mixture()};
}

std::vector<Signature> all_bivariate_signatures() {
  return {Signature({0, 0}), Signature({0, 1}), Signature({1, 0}), Signature({1, 1})};
}

/* two-sided KS distance of a sorted sample against U(0,1) */
double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::fabs(static_cast<double>(i) / n - xs[i]));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - xs[i]));
  }
  return d;
}

double ks_against(std::vector<double> xs, const Generator& g) {
  for (double& x : xs) x = g.cdf(x);
  return ks_uniform(std::move(xs));
}

/* asymptotic two-sided KS critical value at level 0.01 */
double ks_critical(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TEST_CASE("closed-form concordance matches the grid oracle", "[acceptance]") {
  run_criterion(1, "closed-form rho/tau/xi match a 2048^2 grid oracle across the battery", [] {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int models = 0;
    for (const Generator& g : release_battery()) {
      for (const Signature& s : all_bivariate_signatures()) {
        const CopulaModel model(g, s);
        const ConcordanceReport closed = closed_form_concordance(model);
        const ConcordanceReport grid = oracle_concordance(model, OracleGrid{2048, 1});
        worst = std::max({worst, std::fabs(closed.rho - grid.rho),
                          std::fabs(closed.tau - grid.tau), std::fabs(closed.xi - grid.xi)});
        ++models;
      }
    }
    const double wall = elapsed_seconds(t0);
    Outcome out;
    out.ok = worst < 1e-4 && wall < 120.0;
    out.detail = "max |closed-oracle| = " + fmt(worst) + " over " +
                 std::to_string(models) + " models, " + fmt(wall) + " s";
    return out;
  });
}

TEST_CASE("Kendall tau attains its extreme on the centered half-width plateau",
          "[acceptance]") {
  run_criterion(2, "tau peaks at 1/6 for the centered width-1/2 plateau and stays below elsewhere", [] {
    const Signature s({0, 0});
    const Generator plateau = Generator::tabulated({0.0, 2.0, 2.0, 0.0});
    const double tau_star = closed_form_concordance(CopulaModel(plateau, s)).tau;
    bool others_below = true;
    double closest = 0.0;
    for (const Generator& g : release_battery()) {
      const double tau = closed_form_concordance(CopulaModel(g, s)).tau;
      closest = std::max(closest, tau);
      if (!(tau < 1.0 / 6.0)) others_below = false;
    }
    Outcome out;
    out.ok = std::fabs(tau_star - 1.0 / 6.0) < 1e-6 && others_below;
    out.detail = "tau* = " + fmt(tau_star, 8) + ", largest battery tau = " + fmt(closest, 6);
    return out;
  });
}

TEST_CASE("xi is a fixed combination of rho and tau", "[acceptance]") {
  run_criterion(3, "xi equals (-1)^(s1+s2) * (2 rho - 3 tau) to 1e-12", [] {
    double worst = 0.0;
    for (const Generator& g : release_battery()) {
      for (const Signature& s : all_bivariate_signatures()) {
        const ConcordanceReport c = closed_form_concordance(CopulaModel(g, s));
        const double sign = ((s.bits()[0] + s.bits()[1]) % 2 == 0) ? 1.0 : -1.0;
        worst = std::max(worst, std::fabs(c.xi - sign * (2.0 * c.rho - 3.0 * c.tau)));
      }
    }
    Outcome out;
    out.ok = worst <= 1e-12;
    out.detail = "max residual = " + fmt(worst);
    return out;
  });
}

TEST_CASE("sampler margins and wrapped sums follow their stated laws", "[acceptance]") {
  run_criterion(4, "margins uniform, true-orientation sum ~ f, off-orientation sums uniform", [] {
    const Generator g = quarters_mixture();
    const Signature truth({0, 1, 1});
    const std::vector<Signature> wrong = {Signature({0, 0, 0}), Signature({0, 0, 1}),
                                          Signature({0, 1, 0})};
    const std::size_t n = 100000;
    const int runs = 100;
    const double crit = ks_critical(n);
    // tallies: 3 margins, the true-orientation sum, 3 off-orientation sums
    std::array<int, 7> passes{};
    const CopulaModel model(g, truth);
    for (int r = 0; r < runs; ++r) {
      Rng rng(424242, static_cast<std::uint64_t>(r));
      const Matrix u = model.sample(rng, n);
      for (std::size_t j = 0; j < 3; ++j) {
        if (ks_uniform(u.column(j)) < crit) ++passes[j];
      }
      const PseudoObservations obs = known_margin_observations(u);
      if (ks_against(wrapped_sums(obs, truth), g) < crit) ++passes[3];
      for (std::size_t k = 0; k < wrong.size(); ++k) {
        if (ks_uniform(wrapped_sums(obs, wrong[k])) < crit) ++passes[4 + k];
      }
    }
    int min_pass = runs;
    for (int p : passes) min_pass = std::min(min_pass, p);
    Outcome out;
    out.ok = min_pass >= 95;
    out.detail = "weakest law passed " + std::to_string(min_pass) + "/" +
                 std::to_string(runs) + " runs at alpha=0.01";
    return out;
  });
}

TEST_CASE("orientation recovery sharpens with sample size", "[acceptance]") {
  run_criterion(5, "orientation selection: zero errors at n=500, error curve non-increasing", [] {
    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg;
    cfg.study = StudyTag::signature_recovery;
    cfg.dimensions = {2, 3};
    cfg.sample_sizes = {50, 100, 200, 500};
    cfg.battery = {Generator::von_mises(5.0, 0.0), quarters_mixture()};
    cfg.replicates = 100;
    cfg.seed = 20240814;
    const StudyResult res = run_signature_study(cfg);

    // series keyed by (d, generator, method), ordered by n
    std::map<std::tuple<int, std::string, std::string>, std::map<int, double>> series;
    for (const StudyRow& row : res.rows) {
      series[{row.d, row.generator, row.method}][row.n] = row.value;
    }
    bool zero_at_500 = true;
    bool monotone = true;
    double worst_bump = 0.0;
    for (const auto& [key, curve] : series) {
      if (curve.at(500) != 0.0) zero_at_500 = false;
      double prev = 1.0;
      for (const auto& [n, err] : curve) {
        worst_bump = std::max(worst_bump, err - prev);
        if (err > prev + 0.05) monotone = false;
        prev = err;
      }
    }
    const double wall = elapsed_seconds(t0);
    Outcome out;
    out.ok = zero_at_500 && monotone && wall < 300.0;
    out.detail = std::to_string(series.size()) + " curves, worst upward step = " +
                 fmt(worst_bump) + ", " + fmt(wall) + " s";
    return out;
  });
}

TEST_CASE("likelihood fits tighten as the sample grows", "[acceptance]") {
  run_criterion(6, "rank-margin MLE: parameter RMSE at n=5000 under half the n=100 RMSE", [] {
    StudyConfig cfg;
    cfg.study = StudyTag::rmse;
    cfg.dimensions = {2};
    cfg.sample_sizes = {100, 5000};
    cfg.battery = {Generator::beta(0.5, 1.0)};
    cfg.replicates = 50;
    cfg.seed = 77;
    cfg.margins = MarginsMode::rank_based;
    const StudyResult res = run_rmse_study(cfg);

    std::map<std::string, std::map<int, double>> rmse;
    for (const StudyRow& row : res.rows) {
      if (row.metric.rfind("rmse_", 0) == 0) rmse[row.metric][row.n] = row.value;
    }
    bool halved = !rmse.empty();
    std::string detail;
    for (const auto& [metric, by_n] : rmse) {
      const double ratio = by_n.at(5000) / by_n.at(100);
      if (!(ratio < 0.5)) halved = false;
      if (!detail.empty()) detail += ", ";
      detail += metric + " " + fmt(by_n.at(100)) + "->" + fmt(by_n.at(5000)) + " (ratio " +
                fmt(ratio, 2) + ")";
    }
    // Known limitation: the second shape parameter stalls near RMSE 0.18 for
    // every pseudo-observation route because estimated margins perturb the
    // many observations sitting against this generator's singularity at the
    // wrap point; oracle margins recover the full root-n rate.
    return Outcome{halved, detail};
  });
}

TEST_CASE("kernel estimates converge and keep both bumps visible", "[acceptance]") {
  run_criterion(7, "KDE MISE strictly decreasing in n; two modes found at n>=500 in >=90%", [] {
    StudyConfig cfg;
    cfg.study = StudyTag::kde_mise;
    cfg.dimensions = {2};
    cfg.sample_sizes = {100, 500, 1000, 5000};
    cfg.battery = {quarters_mixture()};
    cfg.replicates = 50;
    cfg.seed = 99;
    cfg.margins = MarginsMode::rank_based;
    const StudyResult res = run_kde_mise_study(cfg);

    std::map<int, double> mise;
    for (const StudyRow& row : res.rows) {
      if (row.metric == "mise") mise[row.n] = row.value;
    }
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [n, v] : mise) {
      if (!(v < prev)) decreasing = false;
      prev = v;
    }

    const Generator g = quarters_mixture();
    const Signature sig({0, 1});
    const CopulaModel model(g, sig);
    const double min_prominence = 0.1;
    double worst_rate = 1.0;
    for (int n : {500, 1000, 5000}) {
      int both = 0;
      for (int r = 0; r < 50; ++r) {
        Rng rng(991, static_cast<std::uint64_t>(n * 100 + r));
        const PseudoObservations obs =
            pseudo_observations(model.sample(rng, static_cast<std::size_t>(n)));
        const KdeEstimate est = fit_kde(wrapped_sums(obs, sig), std::nullopt, 200);
        if (count_modes(est, min_prominence) == 2) ++both;
      }
      worst_rate = std::min(worst_rate, both / 50.0);
    }
    Outcome out;
    out.ok = decreasing && worst_rate >= 0.90;
    out.detail = "MISE " + fmt(mise.at(100)) + " > " + fmt(mise.at(500)) + " > " +
                 fmt(mise.at(1000)) + " > " + fmt(mise.at(5000)) +
                 "; worst two-mode rate = " + fmt(worst_rate);
    return out;
  });
}

TEST_CASE("joint tails thin out faster than the corner scale", "[acceptance]") {
  run_criterion(8, "lower and upper tail ratios shrink from t=1e-2 to t=1e-3", [] {
    bool ok = true;
    std::string detail;
    for (const Generator& g : {Generator::beta(1.5, 1.5), Generator::von_mises(2.0, 1.0)}) {
      const CopulaModel model(g, Signature({0, 0}));
      const TailRatio coarse = model.tail_ratio(1e-2);
      const TailRatio fine = model.tail_ratio(1e-3);
      if (!(fine.lower < coarse.lower && fine.upper < coarse.upper)) ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "lower " + fmt(coarse.lower) + "->" + fmt(fine.lower) + ", upper " +
                fmt(coarse.upper) + "->" + fmt(fine.upper);
    }
    return Outcome{ok, detail};
  });
}

TEST_CASE("series characteristic function agrees with Monte Carlo", "[acceptance]") {
  run_criterion(9, "K=64 characteristic series within 3 SE of a 1e6-sample estimate", [] {
    const std::size_t n = 1000000;
    const int num_t = 10;
    bool ok = true;
    double worst_sigmas = 0.0;
    const std::vector<CopulaModel> models = {
        CopulaModel(Generator::beta(1.5, 1.5), Signature({0, 0})),
        CopulaModel(Generator::von_mises(2.0, 1.0), Signature({0, 1}))};
    for (std::size_t m = 0; m < models.size(); ++m) {
      Rng rng(555 + m);
      const Matrix u = models[m].sample(rng, n);
      Rng trng(777 + m);
      for (int q = 0; q < num_t; ++q) {
        const std::array<double, 2> t = {(2.0 * trng.uniform() - 1.0) * 4.0 * pi,
                                         (2.0 * trng.uniform() - 1.0) * 4.0 * pi};
        const std::complex<double> series = models[m].char_function(t, 64);
        double sum_re = 0.0, sum_im = 0.0, sum_re2 = 0.0, sum_im2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double phase = t[0] * u(i, 0) + t[1] * u(i, 1);
          const double c = std::cos(phase), s = std::sin(phase);
          sum_re += c;
          sum_im += s;
          sum_re2 += c * c;
          sum_im2 += s * s;
        }
        const double nd = static_cast<double>(n);
        const double mre = sum_re / nd, mim = sum_im / nd;
        const double se_re = std::sqrt(std::max(sum_re2 / nd - mre * mre, 1e-30) / nd);
        const double se_im = std::sqrt(std::max(sum_im2 / nd - mim * mim, 1e-30) / nd);
        const double sig_re = std::fabs(mre - series.real()) / se_re;
        const double sig_im = std::fabs(mim - series.imag()) / se_im;
        worst_sigmas = std::max({worst_sigmas, sig_re, sig_im});
        if (sig_re > 3.0 || sig_im > 3.0) ok = false;
      }
    }
    return Outcome{ok, "worst deviation = " + fmt(worst_sigmas) + " SE over " +
                           std::to_string(2 * num_t) + " points"};
  });
}

TEST_CASE("the wrapped product matches simulation and the flat factor rule",
          "[acceptance]") {
  run_criterion(10, "product density within 0.05 of a 1e6-draw histogram; flat factor flattens", [] {
    const Generator f = Generator::beta(1.5, 1.5);
    // 128 cells keep the per-bin Monte Carlo noise (~0.012 sd at 1e6 draws)
    // well inside the 0.05 band while still resolving the density's shape
    const std::size_t bins = 128;
    const StarProduct h = star_product(f, {0, 0}, f, {0, 0}, static_cast<int>(bins));
    // the product couples the two wrapped sums through a shared coordinate,
    // so its density is the law of the wrapped difference of the factors
    const std::size_t n = 1000000;
    Rng rng(888);
    std::vector<std::size_t> counts(bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = frac(f.sample_one(rng) - f.sample_one(rng));
      ++counts[std::min(bins - 1, static_cast<std::size_t>(w * static_cast<double>(bins)))];
    }
    double sup = 0.0;
    const auto& table = h.density.table();
    for (std::size_t k = 0; k < bins; ++k) {
      const double mc_density =
          static_cast<double>(counts[k]) * static_cast<double>(bins) / static_cast<double>(n);
      sup = std::max(sup, std::fabs(mc_density - table[k]));
    }
    const bool hist_ok = sup < 0.05;
    const bool sig_ok = h.signature == std::array<int, 2>{0, 1};

    // a flat factor erases the other factor's shape from either side
    double flat_err = 0.0;
    for (const StarProduct& p : {star_product(Generator::uniform(), {0, 0}, f, {0, 1}, 256),
                                 star_product(f, {0, 1}, Generator::uniform(), {0, 0}, 256)}) {
      for (double v : p.density.table()) flat_err = std::max(flat_err, std::fabs(v - 1.0));
    }
    Outcome out;
    out.ok = hist_ok && sig_ok && flat_err < 1e-6;
    out.detail = "sup |table - histogram| = " + fmt(sup) + ", flat-factor error = " + fmt(flat_err);
    return out;
  });
}

TEST_CASE("partial derivatives agree with finite differences", "[acceptance]") {
  run_criterion(11, "closed-form conditional cdf within 1e-4 of central differences, in [0,1]", [] {
    const double h = 1e-5;
    double worst = 0.0;
    bool in_range = true;
    for (const CopulaModel& model :
         {CopulaModel(Generator::beta(2.0, 5.0), Signature({0, 1})),
          CopulaModel(Generator::von_mises(2.0, 1.0), Signature({0, 0}))}) {
      for (int i = 1; i <= 20; ++i) {
        for (int j = 1; j <= 20; ++j) {
          const double u1 = i / 21.0, u2 = j / 21.0;
          for (int axis = 0; axis < 2; ++axis) {
            const std::array<double, 2> at = {u1, u2};
            const double val = model.partial_derivative(axis, at);
            std::array<double, 2> lo = at, hi = at;
            lo[axis] -= h;
            hi[axis] += h;
            const double fd = (model.cdf(hi) - model.cdf(lo)) / (2.0 * h);
            worst = std::max(worst, std::fabs(val - fd));
            if (val < -1e-12 || val > 1.0 + 1e-12) in_range = false;
          }
        }
      }
    }
    Outcome out;
    out.ok = worst < 1e-4 && in_range;
    out.detail = "max |analytic - fd| = " + fmt(worst);
    return out;
  });
}

TEST_CASE("the fitting pipeline identifies a planted circular model", "[acceptance]") {
  run_criterion(12, "planted shifted-difference model: best single family + rho recovered", [] {
    // plant the application-scale model: its half-turn-shifted difference
    // density is the circular-exponential with coefficients (-17.19, -0.80)
    const CopulaModel model(Generator::von_mises(17.19, 0.80), Signature({0, 1}));
    Rng rng(3);
    const Matrix data = model.sample(rng, 840);
    PipelineOptions opts;
    opts.angle_unit = AngleUnit::unit_interval;
    opts.multistarts = 4;
    opts.seed = 7;
    const PipelineResult res = run_data_pipeline(data, opts);

    // fits are sorted by AIC; the first label without '+' is the best
    // single-component family
    std::string best_single;
    double best_rho = std::numeric_limits<double>::quiet_NaN();
    for (const FitReport& fit : res.fits) {
      if (fit.family.find('+') == std::string::npos) {
        best_single = fit.family;
        best_rho = fit.rho;
        break;
      }
    }
    Outcome out;
    const bool family_ok = best_single == "von_mises";
    const bool rho_ok = std::fabs(best_rho - 0.82) < 0.03;
    out.ok = family_ok && rho_ok;
    out.detail = "best single family = " + best_single + ", plug-in rho = " + fmt(best_rho, 4);
    return out;
  });
}
