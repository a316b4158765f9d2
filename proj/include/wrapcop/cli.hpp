#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wrapcop/experiments.hpp"
#include "wrapcop/serialize.hpp"

/*
 * Command-line surface: sampling, evaluation, concordance, signature
 * selection, fitting, KDE, the study runner, and the circular-data pipeline.
 * stdout carries data only; stderr carries the resolved configuration and
 * logs. Exit codes: 0 success, 1 usage error, 2 data or numeric error.
 */
namespace wrapcop::cli {

namespace detail {

inline double parse_double_token(const std::string& tok, const std::string& what) {
  std::size_t a = 0, b = tok.size();
  while (a < b && std::isspace(static_cast<unsigned char>(tok[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(tok[b - 1]))) --b;
  double v = 0.0;
  const auto res = std::from_chars(tok.data() + a, tok.data() + b, v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + b || a == b) {
    throw invalid_parameter_error(what + ": not numeric: '" + tok + "'");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& text, char delim = ',') {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, delim)) out.push_back(tok);
  return out;
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const std::string& tok : split_list(text)) {
    const double v = parse_double_token(tok, what);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw invalid_parameter_error(what + ": not an integer: '" + tok + "'");
    out.push_back(i);
  }
  if (out.empty()) throw invalid_parameter_error(what + ": empty list");
  return out;
}

inline Signature parse_signature(const std::string& text) {
  const std::vector<int> bits = parse_int_list(text, "signature");
  for (int b : bits) {
    if (b != 0 && b != 1) throw invalid_parameter_error("signature: bits must be 0 or 1");
  }
  return Signature(bits);
}

inline std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  for (const std::string& tok : split_list(text)) out.push_back(parse_double_token(tok, "point"));
  if (out.empty()) throw invalid_parameter_error("point: empty list");
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline ordered_json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(what + ": invalid json: " + e.what());
  }
}

/* a model/generator argument is either inline JSON or a path to a JSON file */
inline ordered_json load_json_arg(const std::string& arg, const std::string& what) {
  std::size_t i = 0;
  while (i < arg.size() && std::isspace(static_cast<unsigned char>(arg[i]))) ++i;
  if (i < arg.size() && (arg[i] == '{' || arg[i] == '[')) return parse_json_text(arg, what);
  return parse_json_text(read_file(arg), what);
}

inline CopulaModel load_model(const std::string& arg) {
  return model_from_json(load_json_arg(arg, "model"));
}

inline Matrix load_data(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read file: " + path);
  return parse_csv(in).values;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

inline std::string signature_string(const Signature& s) {
  std::string t;
  for (int b : s.bits()) {
    if (!t.empty()) t += ',';
    t += static_cast<char>('0' + b);
  }
  return t;
}

inline std::string concordance_csv(const ConcordanceReport& r) {
  std::string text = "rho,tau,xi,sign_factor,source,tie_warning\n";
  text += format_double(r.rho) + ',' + format_double(r.tau) + ',' + format_double(r.xi) + ',' +
          std::to_string(r.sign_factor) + ',' + concordance_source_name(r.source) + ',' +
          (r.tie_warning ? "true" : "false") + '\n';
  return text;
}

inline std::string selection_csv(const SignatureSelectionReport& r) {
  std::string text = "signature,ks,cvm,chosen\n";
  for (const auto& row : r.table) {
    text += '"' + signature_string(row.t) + "\"," + format_double(row.ks) + ',' +
            format_double(row.cvm) + ',' + (row.t == r.chosen ? "1" : "0") + '\n';
  }
  return text;
}

inline std::string kde_csv(const KdeEstimate& est) {
  std::string text = "grid,value\n";
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    text += format_double(est.grid[i]) + ',' + format_double(est.values[i]) + '\n';
  }
  return text;
}

inline std::string values_csv(std::span<const double> values) {
  std::string text = "value\n";
  for (double v : values) text += format_double(v) + '\n';
  return text;
}

inline ordered_json pipeline_to_json(const PipelineResult& res) {
  ordered_json j;
  j["n"] = res.n;
  j["input_hash"] = res.input_hash;
  j["tie_warning"] = res.tie_warning;
  j["sample_measures"] = concordance_to_json(res.sample_measures);
  ordered_json fits = ordered_json::array();
  for (const FitReport& f : res.fits) fits.push_back(fit_report_to_json(f));
  j["fits"] = std::move(fits);
  j["histogram"] = res.histogram;
  j["kde"] = kde_to_json(res.kde);
  ordered_json grid = ordered_json::array();
  for (std::size_t i = 0; i < res.beta_density.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < res.beta_density.cols(); ++k) row.push_back(res.beta_density(i, k));
    grid.push_back(std::move(row));
  }
  j["beta_density"] = std::move(grid);
  return j;
}

/* wrapped sums of rank (or parametric-normal) pseudo-observations, boundary
 * atoms nudged off zero so boundary-vanishing likelihoods stay finite */
inline std::vector<double> wrapped_from_data(const Matrix& data, const Signature& sig,
                                             bool normal_margins, double shift) {
  const PseudoObservations obs =
      normal_margins ? parametric_normal_pseudo_observations(data) : pseudo_observations(data);
  std::vector<double> y = wrapped_sums(obs, sig);
  if (shift != 0.0) {
    for (double& v : y) v = frac(v + shift);
  }
  wrapcop::detail::nudge_boundary_atoms(y);
  return y;
}

inline std::vector<FitFamily> families_by_name(const std::string& name) {
  std::vector<FitFamily> all = unimodal_families();
  for (FitFamily& f : mixture_families()) all.push_back(std::move(f));
  if (name == "all") return all;
  for (FitFamily& f : all) {
    if (f.name() == name) return {std::move(f)};
  }
  std::string known = "all";
  for (const FitFamily& f : all) known += ", " + f.name();
  throw invalid_parameter_error("unknown family '" + name + "' (choose from: " + known + ")");
}

}  // namespace detail

struct GlobalFlags {
  std::uint64_t seed = 0;
  int threads = 0;  // 0: WRAPCOP_THREADS, then hardware
  std::string out;
  std::string format = "csv";
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wrapped-sum copula toolkit"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "rng seed (default 0)")->capture_default_str();
  app.add_option("--threads", g.threads,
                 "worker threads (0: WRAPCOP_THREADS env, then hardware)")
      ->capture_default_str();
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  std::string model_arg, data_path, at_point, signature_arg, family_arg = "all";
  std::string method_arg = "ks", margins_arg = "rank_based", study_arg, battery_arg;
  std::string angle_arg = "radians_pm_pi", dims_arg = "2", sizes_arg = "50,100,200,500";
  std::uint64_t n_samples = 0;
  int replicates = 100, multistarts = 8, grid_size = 200, histogram_bins = 32;
  int beta_grid = 64, column_a = 0, column_b = 1;
  double shift = 0.0;
  std::optional<double> bandwidth;
  bool circular = false, allow_full_scale = false;

  CLI::App* sample = app.add_subcommand("sample", "draw joint samples from a model");
  sample->add_option("--model", model_arg, "model json (inline or file path)")->required();
  sample->add_option("--n", n_samples, "number of samples")->required()->check(CLI::PositiveNumber);

  CLI::App* density = app.add_subcommand("density", "evaluate the copula density");
  density->add_option("--model", model_arg, "model json (inline or file path)")->required();
  density->add_option("--data", data_path, "csv of evaluation points in [0,1]^d");
  density->add_option("--at", at_point, "single point, comma-separated coordinates");

  CLI::App* cdf = app.add_subcommand("cdf", "evaluate the copula cdf");
  cdf->add_option("--model", model_arg, "model json (inline or file path)")->required();
  cdf->add_option("--data", data_path, "csv of evaluation points in [0,1]^d");
  cdf->add_option("--at", at_point, "single point, comma-separated coordinates");

  CLI::App* conc = app.add_subcommand("concordance", "closed-form or sample concordance measures");
  conc->add_option("--model", model_arg, "model json: closed-form measures");
  conc->add_option("--data", data_path, "csv of bivariate observations: sample measures");

  CLI::App* select = app.add_subcommand("select-signature", "pick the orientation from data");
  select->add_option("--data", data_path, "csv of observations")->required();
  select->add_option("--method", method_arg, "goodness-of-fit statistic")
      ->check(CLI::IsMember({"ks", "cvm"}))
      ->capture_default_str();
  select->add_option("--margins", margins_arg, "margin handling")
      ->check(CLI::IsMember({"rank_based", "normal_parametric"}))
      ->capture_default_str();

  CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood fit of generator families");
  fit->add_option("--data", data_path, "csv of observations")->required();
  fit->add_option("--family", family_arg, "family name or 'all'")->capture_default_str();
  fit->add_option("--signature", signature_arg, "orientation bits, e.g. 0,1 (default 0,1)");
  fit->add_option("--margins", margins_arg, "margin handling")
      ->check(CLI::IsMember({"rank_based", "normal_parametric"}))
      ->capture_default_str();
  fit->add_option("--shift", shift, "offset added (mod 1) to wrapped sums before fitting")
      ->capture_default_str();
  fit->add_option("--multistarts", multistarts, "optimizer restarts")->capture_default_str();

  CLI::App* kde = app.add_subcommand("kde", "kernel density estimate of the wrapped sum");
  kde->add_option("--data", data_path,
                  "csv: one column of values in [0,1], or observations to rank-transform")
      ->required();
  kde->add_option("--signature", signature_arg, "orientation bits (multi-column data)");
  kde->add_option("--grid", grid_size, "grid size")->capture_default_str();
  kde->add_option("--bandwidth", bandwidth, "kernel bandwidth (default: data-driven)");
  kde->add_flag("--circular", circular, "wrap the kernel around the unit circle");

  CLI::App* study = app.add_subcommand("study", "run a simulation study");
  study->add_option("--study", study_arg, "study name")
      ->required()
      ->check(CLI::IsMember({"signature_recovery", "rmse", "kde_mise"}));
  study->add_option("--dims", dims_arg, "dimensions, comma-separated")->capture_default_str();
  study->add_option("--sizes", sizes_arg, "sample sizes, comma-separated")->capture_default_str();
  study->add_option("--replicates", replicates, "replicates per cell")->capture_default_str();
  study->add_option("--margins", margins_arg, "margin handling")
      ->check(CLI::IsMember({"none", "normal_parametric", "rank_based"}))
      ->capture_default_str();
  study->add_option("--battery", battery_arg, "json array of generators (inline or file path)");
  study->add_option("--multistarts", multistarts, "optimizer restarts")->capture_default_str();
  study->add_flag("--allow-full-scale", allow_full_scale, "permit sample sizes above 5000");

  CLI::App* pipeline = app.add_subcommand("pipeline", "circular-data fitting pipeline");
  pipeline->add_option("--data", data_path, "csv of paired angles")->required();
  pipeline->add_option("--angle-unit", angle_arg, "input angle convention")
      ->check(CLI::IsMember({"radians_pm_pi", "radians_0_2pi", "unit_interval"}))
      ->capture_default_str();
  pipeline->add_option("--column-a", column_a, "first angle column")->capture_default_str();
  pipeline->add_option("--column-b", column_b, "second angle column")->capture_default_str();
  pipeline->add_option("--bins", histogram_bins, "histogram bins")->capture_default_str();
  pipeline->add_option("--beta-grid", beta_grid, "checkerboard grid cells per axis")
      ->capture_default_str();
  pipeline->add_option("--multistarts", multistarts, "optimizer restarts")->capture_default_str();

  for (CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) s->fallthrough();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  const int threads = resolve_threads(g.threads);
  CLI::App* active = app.get_subcommands().front();
  const std::string sub_name = active->get_name();

  err << "wrapcop " << sub_name << " seed=" << g.seed << " threads=" << threads
      << " format=" << g.format << " out=" << (g.out.empty() ? "-" : g.out) << "\n";

  try {
    std::string text;

    if (active == sample) {
      const CopulaModel model = detail::load_model(model_arg);
      Rng rng(g.seed);
      const Matrix draws = model.sample(rng, n_samples);
      if (g.format == "csv") {
        text = samples_to_csv(draws);
      } else {
        ordered_json j;
        j["model"] = model_to_json(model);
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < draws.rows(); ++i) {
          ordered_json row = ordered_json::array();
          for (std::size_t k = 0; k < draws.cols(); ++k) row.push_back(draws(i, k));
          rows.push_back(std::move(row));
        }
        j["samples"] = std::move(rows);
        text = j.dump(2) + "\n";
      }
    } else if (active == density || active == cdf) {
      const CopulaModel model = detail::load_model(model_arg);
      if (data_path.empty() == at_point.empty()) {
        throw invalid_parameter_error(sub_name + ": provide exactly one of --data and --at");
      }
      Matrix points(0, 0);
      if (!at_point.empty()) {
        const std::vector<double> p = detail::parse_point(at_point);
        points = Matrix(1, p.size());
        for (std::size_t k = 0; k < p.size(); ++k) points(0, k) = p[k];
      } else {
        points = detail::load_data(data_path);
      }
      std::vector<double> values(points.rows());
      std::vector<double> errors(points.rows(), 0.0);
      for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto row = points.row(i);
        if (active == density) {
          values[i] = model.density(row);
        } else {
          const CdfEstimate e = model.cdf_estimate(row);
          values[i] = e.value;
          errors[i] = e.std_error;
        }
      }
      if (g.format == "csv") {
        text = detail::values_csv(values);
      } else {
        ordered_json j;
        j["values"] = values;
        if (active == cdf) j["std_errors"] = errors;
        text = j.dump(2) + "\n";
      }
    } else if (active == conc) {
      if (model_arg.empty() == data_path.empty()) {
        throw invalid_parameter_error("concordance: provide exactly one of --model and --data");
      }
      const ConcordanceReport report = model_arg.empty()
                                           ? sample_concordance(detail::load_data(data_path))
                                           : closed_form_concordance(detail::load_model(model_arg));
      text = g.format == "csv" ? detail::concordance_csv(report)
                               : concordance_to_json(report).dump(2) + "\n";
    } else if (active == select) {
      const Matrix data = detail::load_data(data_path);
      const PseudoObservations obs = margins_arg == "normal_parametric"
                                         ? parametric_normal_pseudo_observations(data)
                                         : pseudo_observations(data);
      const SelectionMethod method =
          method_arg == "cvm" ? SelectionMethod::cvm : SelectionMethod::ks;
      const SignatureSelectionReport report = select_signature(obs, method, threads);
      err << "chosen signature: " << detail::signature_string(report.chosen) << "\n";
      text = g.format == "csv" ? detail::selection_csv(report)
                               : selection_report_to_json(report).dump(2) + "\n";
    } else if (active == fit) {
      const Matrix data = detail::load_data(data_path);
      if (signature_arg.empty() && data.cols() != 2) {
        throw invalid_parameter_error("fit: --signature is required unless the data has two columns");
      }
      const Signature used =
          signature_arg.empty() ? Signature({0, 1}) : detail::parse_signature(signature_arg);
      const std::vector<double> y =
          detail::wrapped_from_data(data, used, margins_arg == "normal_parametric", shift);
      const std::vector<FitFamily> families = detail::families_by_name(family_arg);
      FitOptions fo;
      fo.signature = used;
      fo.shift = shift;
      fo.multistarts = multistarts;
      std::vector<FitReport> fits(families.size());
      parallel_for(families.size(), threads, [&](std::size_t i) {
        FitOptions local = fo;
        local.seed = g.seed + 0x9e3779b97f4a7c15ull * (i + 1);
        fits[i] = fit_parametric(y, families[i], local);
      });
      std::stable_sort(fits.begin(), fits.end(), [](const FitReport& a, const FitReport& b) {
        const bool fa = std::isfinite(a.aic), fb = std::isfinite(b.aic);
        if (fa != fb) return fa;
        return a.aic < b.aic;
      });
      if (g.format == "csv") {
        text = fit_table_to_csv(fits);
      } else {
        ordered_json rows = ordered_json::array();
        for (const FitReport& f : fits) rows.push_back(fit_report_to_json(f));
        ordered_json j;
        j["signature"] = used.bits();
        j["fits"] = std::move(rows);
        text = j.dump(2) + "\n";
      }
    } else if (active == kde) {
      const Matrix data = detail::load_data(data_path);
      std::vector<double> y;
      if (data.cols() == 1) {
        y = data.data();
      } else {
        if (signature_arg.empty() && data.cols() != 2) {
          throw invalid_parameter_error("kde: --signature is required unless the data has two columns");
        }
        const Signature sig =
            signature_arg.empty() ? Signature({0, 1}) : detail::parse_signature(signature_arg);
        y = detail::wrapped_from_data(data, sig, false, 0.0);
      }
      const KdeEstimate est = fit_kde(y, bandwidth, grid_size, circular);
      text = g.format == "csv" ? detail::kde_csv(est) : kde_to_json(est).dump(2) + "\n";
    } else if (active == study) {
      StudyConfig cfg;
      cfg.study = study_tag_from_name(study_arg);
      cfg.dimensions = detail::parse_int_list(dims_arg, "dims");
      cfg.sample_sizes = detail::parse_int_list(sizes_arg, "sizes");
      cfg.replicates = replicates;
      cfg.seed = g.seed;
      cfg.margins = margins_mode_from_name(margins_arg);
      cfg.threads = threads;
      cfg.multistarts = multistarts;
      cfg.allow_full_scale = allow_full_scale;
      if (!battery_arg.empty()) {
        const ordered_json arr = detail::load_json_arg(battery_arg, "battery");
        if (!arr.is_array() || arr.empty()) throw data_error("battery: expected a non-empty json array");
        cfg.battery.clear();
        for (const auto& item : arr) cfg.battery.push_back(generator_from_json(item));
      } else {
        cfg.battery = default_battery(cfg.study);
      }
      const StudyArtifacts art = run_study(cfg);
      err << "study rows: " << art.result.rows.size()
          << " wall_seconds: " << art.manifest["wall_time_seconds"].get<double>() << "\n";
      if (g.out.empty()) {
        err << "manifest: " << art.manifest.dump() << "\n";
      } else {
        write_text_file(g.out + ".manifest.json", art.manifest.dump(2) + "\n");
      }
      text = art.csv;
    } else if (active == pipeline) {
      PipelineOptions opts;
      opts.angle_unit = angle_unit_from_name(angle_arg);
      opts.column_a = column_a;
      opts.column_b = column_b;
      opts.histogram_bins = histogram_bins;
      opts.beta_grid_cells = beta_grid;
      opts.multistarts = multistarts;
      opts.seed = g.seed;
      opts.threads = threads;
      const PipelineResult res = run_data_pipeline(data_path, opts);
      err << "pipeline n=" << res.n << " input_hash=" << res.input_hash
          << " wall_seconds=" << res.wall_seconds << "\n";
      text = g.format == "csv" ? fit_table_to_csv(res.fits)
                               : detail::pipeline_to_json(res).dump(2) + "\n";
    }

    detail::emit(text, g.out, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int run_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace wrapcop::cli
