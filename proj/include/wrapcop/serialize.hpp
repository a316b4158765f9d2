#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/uuid/detail/sha1.hpp>

#include "json.hpp"
#include "wrapcop/concordance.hpp"
#include "wrapcop/copula.hpp"
#include "wrapcop/errors.hpp"
#include "wrapcop/generator.hpp"
#include "wrapcop/inference.hpp"
#include "wrapcop/matrix.hpp"

namespace wrapcop {

using ordered_json = nlohmann::ordered_json;

/* shortest decimal string that parses back to the same double */
inline std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

/* fixed 17 significant digits: every bit of the double survives a round trip */
inline std::string format_double_17(double v) {
  char buf[40];
  const auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, end);
}

/* ---- generator and model JSON ---- */

inline ordered_json generator_to_json(const Generator& g) {
  ordered_json j;
  j["family"] = family_name(g.family());
  switch (g.family()) {
    case Family::mixture: {
      ordered_json mix;
      mix["weight"] = g.named_params()[0].second;
      mix["first"] = generator_to_json(g.component(0));
      mix["second"] = generator_to_json(g.component(1));
      j["mixture"] = std::move(mix);
      break;
    }
    case Family::tabulated:
      j["values"] = g.table();
      break;
    default: {
      ordered_json params = ordered_json::object();
      for (const auto& [key, value] : g.named_params()) params[key] = value;
      j["params"] = std::move(params);
    }
  }
  return j;
}

namespace detail {

inline double json_param(const ordered_json& j, const char* key) {
  if (!j.contains("params") || !j["params"].contains(key)) {
    throw data_error(std::string("generator JSON: missing parameter '") + key + "'");
  }
  return j["params"][key].get<double>();
}

}  // namespace detail

inline Generator generator_from_json(const ordered_json& j) {
  if (!j.contains("family")) throw data_error("generator JSON: missing 'family'");
  const std::string family = j["family"].get<std::string>();
  if (family == "uniform") return Generator::uniform();
  if (family == "triangular") {
    return Generator::triangular(detail::json_param(j, "b"), detail::json_param(j, "m"));
  }
  if (family == "beta") {
    return Generator::beta(detail::json_param(j, "alpha"), detail::json_param(j, "beta"));
  }
  if (family == "trunc_normal") {
    return Generator::trunc_normal(detail::json_param(j, "mu"), detail::json_param(j, "sigma"));
  }
  if (family == "kumaraswamy") {
    return Generator::kumaraswamy(detail::json_param(j, "a"), detail::json_param(j, "b"));
  }
  if (family == "logit_normal") {
    return Generator::logit_normal(detail::json_param(j, "mu"), detail::json_param(j, "sigma"));
  }
  if (family == "von_mises") {
    return Generator::von_mises(detail::json_param(j, "phi1"), detail::json_param(j, "phi2"));
  }
  if (family == "piecewise_constant") {
    return Generator::piecewise_constant(static_cast<int>(detail::json_param(j, "n")));
  }
  if (family == "tabulated") {
    if (!j.contains("values")) throw data_error("generator JSON: tabulated needs 'values'");
    return Generator::tabulated(j["values"].get<std::vector<double>>());
  }
  if (family == "mixture") {
    if (!j.contains("mixture")) throw data_error("generator JSON: mixture needs 'mixture'");
    const auto& mix = j["mixture"];
    if (!mix.contains("weight") || !mix.contains("first") || !mix.contains("second")) {
      throw data_error("generator JSON: mixture needs weight/first/second");
    }
    return Generator::mixture(mix["weight"].get<double>(), generator_from_json(mix["first"]),
                              generator_from_json(mix["second"]));
  }
  throw data_error("generator JSON: unknown family '" + family + "'");
}

inline ordered_json model_to_json(const CopulaModel& m) {
  ordered_json j;
  j["d"] = m.dim();
  j["signature"] = m.signature().bits();
  j["generator"] = generator_to_json(m.generator());
  return j;
}

inline CopulaModel model_from_json(const ordered_json& j) {
  if (!j.contains("signature") || !j.contains("generator")) {
    throw data_error("model JSON: needs 'signature' and 'generator'");
  }
  const std::vector<int> bits = j["signature"].get<std::vector<int>>();
  if (j.contains("d") && j["d"].get<std::size_t>() != bits.size()) {
    throw data_error("model JSON: 'd' disagrees with the signature length");
  }
  return CopulaModel(generator_from_json(j["generator"]), Signature(bits));
}

/* ---- report JSON ---- */

inline ordered_json concordance_to_json(const ConcordanceReport& r) {
  ordered_json j;
  j["rho"] = r.rho;
  j["tau"] = r.tau;
  j["xi"] = r.xi;
  j["sign_factor"] = r.sign_factor;
  j["source"] = concordance_source_name(r.source);
  j["tie_warning"] = r.tie_warning;
  return j;
}

inline ordered_json fit_report_to_json(const FitReport& r) {
  ordered_json j;
  j["family"] = r.family;
  ordered_json params = ordered_json::object();
  for (const auto& [key, value] : r.parameters) params[key] = value;
  j["parameters"] = std::move(params);
  j["log_likelihood"] = r.log_likelihood;
  j["aic"] = r.aic;
  j["rho"] = r.rho;
  j["tau"] = r.tau;
  j["xi"] = r.xi;
  j["converged"] = r.converged;
  j["boundary_warning"] = r.boundary_warning;
  j["iterations"] = r.iterations;
  return j;
}

inline ordered_json selection_report_to_json(const SignatureSelectionReport& r) {
  ordered_json j;
  j["chosen"] = r.chosen.bits();
  j["method"] = selection_method_name(r.method);
  ordered_json table = ordered_json::array();
  for (const auto& row : r.table) {
    ordered_json entry;
    entry["signature"] = row.t.bits();
    entry["ks"] = row.ks;
    entry["cvm"] = row.cvm;
    table.push_back(std::move(entry));
  }
  j["table"] = std::move(table);
  return j;
}

inline ordered_json kde_to_json(const KdeEstimate& est) {
  ordered_json j;
  j["kernel"] = est.kernel;
  j["bandwidth"] = est.bandwidth;
  j["circular"] = est.circular;
  j["grid"] = est.grid;
  j["values"] = est.values;
  return j;
}

/* ---- CSV ---- */

inline std::string samples_to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (j) out += ',';
    out += "u" + std::to_string(j + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double_17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline std::string fit_table_to_csv(std::span<const FitReport> fits) {
  std::string out = "generator,parameters,rho,tau,xi,aic\n";
  for (const FitReport& r : fits) {
    std::string params;
    for (const auto& [key, value] : r.parameters) {
      if (!params.empty()) params += "; ";
      params += key + "=" + format_double(value);
    }
    out += r.family + ",\"" + params + "\"," + format_double(r.rho) + ',' +
           format_double(r.tau) + ',' + format_double(r.xi) + ',' + format_double(r.aic) + '\n';
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix values{0, 0};
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_number(const std::string& token, double& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  const auto [end, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && end == last;
}

}  // namespace detail

/*
 * Numeric table reader.  A first line with any non-numeric token is used as
 * the header.  Data rows must be rectangular and fully numeric; offenders are
 * reported with their 1-based line number.
 */
inline CsvTable parse_csv(std::istream& in, char delim = ',') {
  CsvTable out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> tokens = detail::split_line(line, delim);
    std::vector<double> row(tokens.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (!detail::parse_number(tokens[j], row[j])) {
        numeric = false;
        bad_col = j;
        break;
      }
    }
    if (first_content) {
      first_content = false;
      if (!numeric) {
        out.header = tokens;
        width = tokens.size();
        continue;
      }
    }
    if (!numeric) {
      throw data_error("csv line " + std::to_string(line_no) + ", column " +
                       std::to_string(bad_col + 1) + ": not numeric");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw data_error("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " fields, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  }
  out.values = std::move(m);
  return out;
}

inline CsvTable read_csv_file(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open csv file: " + path);
  return parse_csv(in, delim);
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open output file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw data_error("failed writing output file: " + path);
}

/* ---- content hashing (git blob convention) ---- */

inline std::string sha1_hex(std::string_view content) {
  boost::uuids::detail::sha1 hash;
  hash.process_bytes(content.data(), content.size());
  unsigned int digest[5];
  hash.get_digest(digest);
  std::string out(40, '0');
  for (int i = 0; i < 5; ++i) {
    std::snprintf(out.data() + 8 * i, 9, "%08x", digest[i]);
  }
  return out;
}

inline std::string git_blob_hash(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob += '\0';
  blob.append(content);
  return sha1_hex(blob);
}

}  // namespace wrapcop
