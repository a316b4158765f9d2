#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "wrapcop/concordance.hpp"
#include "wrapcop/copula.hpp"
#include "wrapcop/inference.hpp"
#include "wrapcop/parallel.hpp"
#include "wrapcop/serialize.hpp"

namespace wrapcop {

enum class StudyTag { signature_recovery, rmse, kde_mise, data_pipeline };

inline const char* study_tag_name(StudyTag t) {
  switch (t) {
    case StudyTag::signature_recovery: return "signature_recovery";
    case StudyTag::rmse: return "rmse";
    case StudyTag::kde_mise: return "kde_mise";
    case StudyTag::data_pipeline: return "data_pipeline";
  }
  return "?";
}

inline StudyTag study_tag_from_name(const std::string& name) {
  for (StudyTag t : {StudyTag::signature_recovery, StudyTag::rmse, StudyTag::kde_mise,
                     StudyTag::data_pipeline}) {
    if (name == study_tag_name(t)) return t;
  }
  throw invalid_parameter_error("unknown study tag: " + name);
}

enum class MarginsMode { none, normal_parametric, rank_based };

inline const char* margins_mode_name(MarginsMode m) {
  switch (m) {
    case MarginsMode::none: return "none";
    case MarginsMode::normal_parametric: return "normal_parametric";
    case MarginsMode::rank_based: return "rank_based";
  }
  return "?";
}

inline MarginsMode margins_mode_from_name(const std::string& name) {
  for (MarginsMode m :
       {MarginsMode::none, MarginsMode::normal_parametric, MarginsMode::rank_based}) {
    if (name == margins_mode_name(m)) return m;
  }
  throw invalid_parameter_error("unknown margins mode: " + name);
}

/* the alternating orientation (0,1,0,...) used by the parametric/KDE studies */
inline Signature alternating_signature(int d) {
  if (d < 2) throw dimension_error("alternating_signature: need d >= 2");
  std::vector<int> bits(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) bits[static_cast<std::size_t>(j)] = j % 2;
  return Signature(bits);
}

/* all 2^(d-1) signatures with leading bit 0, in lexicographic order */
inline std::vector<Signature> canonical_signatures(int d) {
  if (d < 2 || d > 20) throw dimension_error("canonical_signatures: d must lie in [2, 20]");
  const std::size_t total = std::size_t{1} << (d - 1);
  std::vector<Signature> out;
  out.reserve(total);
  for (std::size_t index = 0; index < total; ++index) {
    std::vector<int> bits(static_cast<std::size_t>(d), 0);
    for (int k = 0; k + 1 < d; ++k) {
      bits[static_cast<std::size_t>(k) + 1] = static_cast<int>((index >> (d - 2 - k)) & 1U);
    }
    out.emplace_back(std::move(bits));
  }
  return out;
}

/* compact single-token label, e.g. beta(alpha=0.5;beta=1); no commas, CSV-safe */
inline std::string generator_label(const Generator& g) {
  if (g.family() == Family::mixture) {
    return "mixture(weight=" + format_double(g.named_params()[0].second) + ";" +
           generator_label(g.component(0)) + ";" + generator_label(g.component(1)) + ")";
  }
  if (g.family() == Family::tabulated) {
    return "tabulated[" + std::to_string(g.table().size()) + "]";
  }
  std::string out = family_name(g.family());
  const auto params = g.named_params();
  if (params.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ';';
    out += params[i].first + "=" + format_double(params[i].second);
  }
  out += ')';
  return out;
}

struct StudyConfig {
  StudyTag study = StudyTag::signature_recovery;
  std::vector<int> dimensions = {2};
  std::vector<int> sample_sizes = {50, 100, 200, 500};
  std::vector<Generator> battery;
  int replicates = 100;
  std::uint64_t seed = 0;
  MarginsMode margins = MarginsMode::rank_based;
  int threads = 1;
  int multistarts = 8;
  bool allow_full_scale = false;  // lifts the default n <= 5000 cap
};

/* the generator sets the studies default to when the battery is left empty */
inline std::vector<Generator> default_battery(StudyTag tag) {
  const Generator quarters_mixture = Generator::mixture(
      0.25, Generator::trunc_normal(0.25, 0.1), Generator::trunc_normal(0.75, 0.1));
  switch (tag) {
    case StudyTag::signature_recovery:
    case StudyTag::rmse:
      return {Generator::triangular(1.0, 1.0), Generator::beta(0.5, 1.0), quarters_mixture};
    case StudyTag::kde_mise:
      return {quarters_mixture};
    case StudyTag::data_pipeline:
      return {};
  }
  return {};
}

struct StudyRow {
  std::string study;
  int d = 0;
  int n = 0;
  std::string generator;
  std::string method;
  std::string metric;
  double value = 0.0;
  double mc_stderr = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
};

inline std::string study_to_csv(const StudyResult& result) {
  std::string out = "study,d,n,generator,method,metric,value,mc_stderr\n";
  for (const StudyRow& r : result.rows) {
    out += r.study + ',' + std::to_string(r.d) + ',' + std::to_string(r.n) + ',' + r.generator +
           ',' + r.method + ',' + r.metric + ',' + format_double(r.value) + ',' +
           format_double(r.mc_stderr) + '\n';
  }
  return out;
}

namespace detail {

inline void validate_study_config(const StudyConfig& cfg) {
  if (cfg.replicates < 1) throw invalid_parameter_error("study: replicates must be >= 1");
  if (cfg.battery.empty()) throw invalid_parameter_error("study: generator battery is empty");
  if (cfg.dimensions.empty() || cfg.sample_sizes.empty()) {
    throw invalid_parameter_error("study: need at least one dimension and one sample size");
  }
  for (int d : cfg.dimensions) {
    if (d < 2 || d > 20) throw invalid_parameter_error("study: dimensions must lie in [2, 20]");
  }
  for (int n : cfg.sample_sizes) {
    if (n < 10) throw invalid_parameter_error("study: sample sizes below 10 are not supported");
    if (n > 5000 && !cfg.allow_full_scale) {
      throw invalid_parameter_error("study: n > 5000 requires allow_full_scale");
    }
  }
  if (cfg.multistarts < 1) throw invalid_parameter_error("study: multistarts must be >= 1");
}

/* sample mean / (sd / sqrt(R)) aggregation for replicate vectors */
inline double replicate_mean(std::span<const double> v) { return pairwise_sum(v) / v.size(); }

inline double replicate_stderr(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

/* j-th margin becomes N(j, j); ranks are untouched, parametric routes are not */
inline Matrix apply_normal_margins(const Matrix& u) {
  Matrix x(u.rows(), u.cols());
  for (std::size_t j = 0; j < u.cols(); ++j) {
    const double mean = static_cast<double>(j + 1);
    const double sd = std::sqrt(static_cast<double>(j + 1));
    for (std::size_t i = 0; i < u.rows(); ++i) {
      const double p = std::min(std::max(u(i, j), 0x1.0p-53), 1.0 - 0x1.0p-53);
      x(i, j) = mean + sd * normal_quantile(p);
    }
  }
  return x;
}

/*
 * Rank-based wrapped sums live on the grid k/(n+1), so an exact 0 stands for
 * the cell [0, 1/(n+1)).  Representing the atom by the cell midpoint keeps
 * likelihoods of boundary-vanishing families finite.
 */
inline void nudge_boundary_atoms(std::vector<double>& y) {
  const double eps = 0.5 / (static_cast<double>(y.size()) + 1.0);
  for (double& v : y) {
    if (v == 0.0) v = eps;
  }
}

inline bool same_identifiability_class(const std::vector<int>& got, const std::vector<int>& truth) {
  bool same = true;
  bool flipped = true;
  for (std::size_t j = 0; j < got.size(); ++j) {
    same = same && got[j] == truth[j];
    flipped = flipped && got[j] == 1 - truth[j];
  }
  return same || flipped;
}

inline std::size_t argmax_candidate(const std::vector<CandidateStat>& table, bool use_ks) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const double challenger = use_ks ? table[i].ks : table[i].cvm;
    const double incumbent = use_ks ? table[best].ks : table[best].cvm;
    if (challenger > incumbent) best = i;
  }
  return best;
}

}  // namespace detail

/* truth parameters flattened with the same names the fit reports use */
inline std::vector<std::pair<std::string, double>> truth_parameters(const Generator& g) {
  if (g.family() != Family::mixture) return g.named_params();
  std::vector<std::pair<std::string, double>> out{{"weight", g.named_params()[0].second}};
  for (const auto& [k, v] : g.component(0).named_params()) out.emplace_back(k + "_1", v);
  for (const auto& [k, v] : g.component(1).named_params()) out.emplace_back(k + "_2", v);
  return out;
}

/* the fittable family containing the given generator */
inline FitFamily fit_family_for(const Generator& g) {
  switch (g.family()) {
    case Family::uniform: return FitFamily::uniform();
    case Family::triangular: return FitFamily::triangular();
    case Family::beta: return FitFamily::beta();
    case Family::trunc_normal: return FitFamily::trunc_normal();
    case Family::kumaraswamy: return FitFamily::kumaraswamy();
    case Family::logit_normal: return FitFamily::logit_normal();
    case Family::von_mises: return FitFamily::von_mises();
    case Family::mixture:
      return FitFamily::mixture(fit_family_for(g.component(0)), fit_family_for(g.component(1)));
    default:
      throw invalid_parameter_error("no fittable family for " + generator_label(g));
  }
}

/*
 * Recovery of the dependence orientation: each replicate draws from the model,
 * rank-transforms, and runs both distance criteria over all canonical
 * candidates.  A selection equal to the truth or its bit-flip counts as
 * correct; the reported value is the error proportion.
 */
inline StudyResult run_signature_study(const StudyConfig& cfg) {
  detail::validate_study_config(cfg);
  StudyResult out;
  std::uint64_t cell = 0;
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  for (int d : cfg.dimensions) {
    const std::vector<Signature> truths = canonical_signatures(d);
    for (int n : cfg.sample_sizes) {
      for (const Generator& g : cfg.battery) {
        std::vector<double> err_ks(reps), err_cvm(reps);
        const std::uint64_t base = cell * reps;
        parallel_for(reps, static_cast<unsigned>(cfg.threads), [&](std::size_t r) {
          const Rng rep_rng(cfg.seed, base + r);
          double eks = 0.0, ecvm = 0.0;
          for (std::size_t c = 0; c < truths.size(); ++c) {
            Rng rng = rep_rng.derive(c);
            const CopulaModel model(g, truths[c]);
            const PseudoObservations obs =
                pseudo_observations(model.sample(rng, static_cast<std::size_t>(n)));
            const SignatureSelectionReport rep = select_signature(obs, SelectionMethod::ks, 1);
            const auto& truth_bits = truths[c].bits();
            const std::size_t iks = detail::argmax_candidate(rep.table, true);
            const std::size_t icvm = detail::argmax_candidate(rep.table, false);
            if (!detail::same_identifiability_class(rep.table[iks].t.bits(), truth_bits)) {
              eks += 1.0;
            }
            if (!detail::same_identifiability_class(rep.table[icvm].t.bits(), truth_bits)) {
              ecvm += 1.0;
            }
          }
          err_ks[r] = eks / static_cast<double>(truths.size());
          err_cvm[r] = ecvm / static_cast<double>(truths.size());
        });
        const std::string label = generator_label(g);
        out.rows.push_back({study_tag_name(cfg.study), d, n, label, "ks", "error_proportion",
                            detail::replicate_mean(err_ks), detail::replicate_stderr(err_ks)});
        out.rows.push_back({study_tag_name(cfg.study), d, n, label, "cvm", "error_proportion",
                            detail::replicate_mean(err_cvm), detail::replicate_stderr(err_cvm)});
        ++cell;
      }
    }
  }
  return out;
}

/*
 * Parameter recovery by maximum likelihood under the alternating orientation
 * with N(j, j) margins.  Reports one RMSE row per parameter plus the count of
 * non-converged (excluded) fits per cell.
 */
inline StudyResult run_rmse_study(const StudyConfig& cfg) {
  detail::validate_study_config(cfg);
  if (cfg.margins != MarginsMode::normal_parametric && cfg.margins != MarginsMode::rank_based) {
    throw invalid_parameter_error("rmse study: margins must be normal_parametric or rank_based");
  }
  StudyResult out;
  std::uint64_t cell = 0;
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::string route = margins_mode_name(cfg.margins);
  for (int d : cfg.dimensions) {
    const Signature sig = alternating_signature(d);
    for (int n : cfg.sample_sizes) {
      for (const Generator& g : cfg.battery) {
        const auto truth = truth_parameters(g);
        const FitFamily family = fit_family_for(g);
        const std::uint64_t base = cell * reps;
        std::vector<char> converged(reps, 0);
        Matrix abs_err(reps, truth.size());
        parallel_for(reps, static_cast<unsigned>(cfg.threads), [&](std::size_t r) {
          Rng rng(cfg.seed, base + r);
          const CopulaModel model(g, sig);
          const Matrix x = detail::apply_normal_margins(model.sample(rng, static_cast<std::size_t>(n)));
          const PseudoObservations obs = cfg.margins == MarginsMode::rank_based
                                             ? pseudo_observations(x)
                                             : parametric_normal_pseudo_observations(x);
          std::vector<double> y = wrapped_sums(obs, sig);
          detail::nudge_boundary_atoms(y);
          FitOptions fo;
          fo.multistarts = cfg.multistarts;
          fo.seed = base + r;
          const FitReport rep = fit_parametric(y, family, fo);
          converged[r] = rep.converged ? 1 : 0;
          for (std::size_t k = 0; k < truth.size(); ++k) {
            abs_err(r, k) = std::fabs(rep.parameters[k].second - truth[k].second);
          }
        });
        const std::string label = generator_label(g);
        std::size_t kept = 0;
        for (char c : converged) kept += c;
        for (std::size_t k = 0; k < truth.size(); ++k) {
          std::vector<double> sq, abs;
          sq.reserve(kept);
          abs.reserve(kept);
          for (std::size_t r = 0; r < reps; ++r) {
            if (!converged[r]) continue;
            sq.push_back(abs_err(r, k) * abs_err(r, k));
            abs.push_back(abs_err(r, k));
          }
          const double rmse = sq.empty() ? 0.0 : std::sqrt(detail::replicate_mean(sq));
          out.rows.push_back({study_tag_name(cfg.study), d, n, label, route,
                              "rmse_" + truth[k].first, rmse, detail::replicate_stderr(abs)});
        }
        out.rows.push_back({study_tag_name(cfg.study), d, n, label, route, "excluded_fits",
                            static_cast<double>(reps - kept), 0.0});
        ++cell;
      }
    }
  }
  return out;
}

/*
 * Integrated squared error of the kernel density estimate of the generator,
 * averaged over replicates, plus the mass of the replicate-mean curve as a
 * normalization diagnostic.
 */
inline StudyResult run_kde_mise_study(const StudyConfig& cfg) {
  detail::validate_study_config(cfg);
  StudyResult out;
  std::uint64_t cell = 0;
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::string route = margins_mode_name(cfg.margins);
  constexpr int kGrid = 200;
  for (int d : cfg.dimensions) {
    const Signature sig = alternating_signature(d);
    for (int n : cfg.sample_sizes) {
      for (const Generator& g : cfg.battery) {
        const std::uint64_t base = cell * reps;
        std::vector<double> ise(reps);
        Matrix curves(reps, kGrid);
        parallel_for(reps, static_cast<unsigned>(cfg.threads), [&](std::size_t r) {
          Rng rng(cfg.seed, base + r);
          const CopulaModel model(g, sig);
          const Matrix u = model.sample(rng, static_cast<std::size_t>(n));
          PseudoObservations obs = [&] {
            switch (cfg.margins) {
              case MarginsMode::none: return known_margin_observations(u);
              case MarginsMode::rank_based: return pseudo_observations(u);
              default:
                return parametric_normal_pseudo_observations(detail::apply_normal_margins(u));
            }
          }();
          const std::vector<double> y = wrapped_sums(obs, sig);
          const KdeEstimate est = fit_kde(y, std::nullopt, kGrid);
          ise[r] = kde_ise(est, g);
          for (int k = 0; k < kGrid; ++k) curves(r, static_cast<std::size_t>(k)) = est.values[static_cast<std::size_t>(k)];
        });
        const std::string label = generator_label(g);
        out.rows.push_back({study_tag_name(cfg.study), d, n, label, route, "mise",
                            detail::replicate_mean(ise), detail::replicate_stderr(ise)});
        KdeEstimate mean_curve;
        mean_curve.grid.resize(kGrid);
        mean_curve.values.resize(kGrid);
        for (int k = 0; k < kGrid; ++k) {
          mean_curve.grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / (kGrid - 1);
          mean_curve.values[static_cast<std::size_t>(k)] =
              detail::replicate_mean(curves.column(static_cast<std::size_t>(k)));
        }
        out.rows.push_back({study_tag_name(cfg.study), d, n, label, route, "mean_density_mass",
                            kde_mass(mean_curve), 0.0});
        ++cell;
      }
    }
  }
  return out;
}

inline ordered_json study_config_to_json(const StudyConfig& cfg) {
  ordered_json j;
  j["study"] = study_tag_name(cfg.study);
  j["dimensions"] = cfg.dimensions;
  j["sample_sizes"] = cfg.sample_sizes;
  ordered_json battery = ordered_json::array();
  for (const Generator& g : cfg.battery) battery.push_back(generator_label(g));
  j["battery"] = std::move(battery);
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["margins"] = margins_mode_name(cfg.margins);
  j["threads"] = cfg.threads;
  j["multistarts"] = cfg.multistarts;
  j["allow_full_scale"] = cfg.allow_full_scale;
  return j;
}

struct StudyArtifacts {
  StudyResult result;
  std::string csv;
  ordered_json manifest;
};

/* Dispatch on the study tag, returning the long table, its CSV rendering, and
 * a manifest {config echo, content hash, wall time}. */
inline StudyArtifacts run_study(const StudyConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  StudyArtifacts art;
  switch (cfg.study) {
    case StudyTag::signature_recovery: art.result = run_signature_study(cfg); break;
    case StudyTag::rmse: art.result = run_rmse_study(cfg); break;
    case StudyTag::kde_mise: art.result = run_kde_mise_study(cfg); break;
    case StudyTag::data_pipeline:
      throw invalid_parameter_error("run_study: use run_data_pipeline for csv input");
  }
  art.csv = study_to_csv(art.result);
  const ordered_json cfg_json = study_config_to_json(cfg);
  art.manifest["config"] = cfg_json;
  art.manifest["inputs_hash"] = git_blob_hash(cfg_json.dump());
  art.manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return art;
}

/* ---- circular-data fitting pipeline ---- */

enum class AngleUnit { radians_pm_pi, radians_0_2pi, unit_interval };

inline const char* angle_unit_name(AngleUnit a) {
  switch (a) {
    case AngleUnit::radians_pm_pi: return "radians_pm_pi";
    case AngleUnit::radians_0_2pi: return "radians_0_2pi";
    case AngleUnit::unit_interval: return "unit_interval";
  }
  return "?";
}

inline AngleUnit angle_unit_from_name(const std::string& name) {
  for (AngleUnit a :
       {AngleUnit::radians_pm_pi, AngleUnit::radians_0_2pi, AngleUnit::unit_interval}) {
    if (name == angle_unit_name(a)) return a;
  }
  throw invalid_parameter_error("unknown angle unit: " + name);
}

struct PipelineOptions {
  AngleUnit angle_unit = AngleUnit::radians_pm_pi;
  int column_a = 0;  // zero-based column picks
  int column_b = 1;
  int histogram_bins = 32;
  int beta_grid_cells = 64;
  int multistarts = 8;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PipelineResult {
  std::size_t n = 0;
  bool tie_warning = false;
  std::vector<double> shifted_diffs;  // (u1 - u2 + 1/2) mod 1 per observation
  std::vector<double> histogram;      // density heights on equal-width bins
  std::vector<FitReport> fits;        // all twenty candidates, ascending AIC
  KdeEstimate kde;
  Matrix beta_density;                // cell-center values of the rank-beta copula density
  ConcordanceReport sample_measures;
  std::string input_hash;             // blob hash of the source bytes (file entry point)
  double wall_seconds = 0.0;
};

/*
 * The full bivariate fitting pipeline: rescale angles to [0,1), rank-transform,
 * take half-turn-shifted wrapped differences, fit the five unimodal families
 * and their fifteen two-component mixtures, and attach KDE, rank-beta density
 * grid, and sample concordance measures for comparison.
 */
inline PipelineResult run_data_pipeline(const Matrix& data, const PipelineOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (data.cols() < 2) throw dimension_error("pipeline: need at least two numeric columns");
  const auto in_range = [&](int c) { return c >= 0 && static_cast<std::size_t>(c) < data.cols(); };
  if (!in_range(opts.column_a) || !in_range(opts.column_b) || opts.column_a == opts.column_b) {
    throw invalid_parameter_error("pipeline: column picks must be distinct and in range");
  }
  if (data.rows() < 50) throw data_error("pipeline: need at least 50 observations");
  if (opts.histogram_bins < 2 || opts.beta_grid_cells < 2) {
    throw invalid_parameter_error("pipeline: bins and grid cells must be at least 2");
  }

  PipelineResult out;
  out.n = data.rows();

  Matrix pair(data.rows(), 2);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (int which = 0; which < 2; ++which) {
      const double x = data(i, static_cast<std::size_t>(which == 0 ? opts.column_a : opts.column_b));
      double v = x;
      constexpr double two_pi = 6.283185307179586476925286766559;
      if (opts.angle_unit == AngleUnit::radians_pm_pi) v = (x + two_pi / 2.0) / two_pi;
      if (opts.angle_unit == AngleUnit::radians_0_2pi) v = x / two_pi;
      pair(i, static_cast<std::size_t>(which)) = v;
    }
  }

  const PseudoObservations obs = pseudo_observations(pair);
  out.tie_warning = obs.tie_warning;

  out.shifted_diffs = wrapped_sums(obs, Signature({0, 1}));
  for (double& v : out.shifted_diffs) v = frac(v + 0.5);
  detail::nudge_boundary_atoms(out.shifted_diffs);

  out.histogram.assign(static_cast<std::size_t>(opts.histogram_bins), 0.0);
  for (double v : out.shifted_diffs) {
    const auto bin = std::min(static_cast<std::size_t>(v * opts.histogram_bins),
                              out.histogram.size() - 1);
    out.histogram[bin] += static_cast<double>(opts.histogram_bins) / static_cast<double>(out.n);
  }

  std::vector<FitFamily> families = unimodal_families();
  for (FitFamily& f : mixture_families()) families.push_back(std::move(f));
  out.fits.resize(families.size());
  parallel_for(families.size(), static_cast<unsigned>(opts.threads), [&](std::size_t i) {
    FitOptions fo;
    fo.shift = 0.5;
    fo.multistarts = opts.multistarts;
    fo.seed = opts.seed + 0x9e3779b97f4a7c15ull * (i + 1);
    out.fits[i] = fit_parametric(out.shifted_diffs, families[i], fo);
  });
  std::stable_sort(out.fits.begin(), out.fits.end(),
                   [](const FitReport& a, const FitReport& b) { return a.aic < b.aic; });

  out.kde = fit_kde(out.shifted_diffs);

  const std::size_t m = static_cast<std::size_t>(opts.beta_grid_cells);
  out.beta_density = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double u[2] = {(static_cast<double>(i) + 0.5) / static_cast<double>(m),
                           (static_cast<double>(j) + 0.5) / static_cast<double>(m)};
      out.beta_density(i, j) = empirical_beta_density(obs, u);
    }
  }

  out.sample_measures = sample_concordance(pair);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline PipelineResult run_data_pipeline(const std::string& csv_path,
                                        const PipelineOptions& opts = {}) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw data_error("cannot open csv file: " + csv_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  std::istringstream stream(content);
  const CsvTable table = parse_csv(stream);
  PipelineResult out = run_data_pipeline(table.values, opts);
  out.input_hash = git_blob_hash(content);
  return out;
}

}  // namespace wrapcop
