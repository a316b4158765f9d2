#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "wrapcop/serialize.hpp"

using namespace wrapcop;

namespace {

void check_same_generator(const Generator& a, const Generator& b) {
  REQUIRE(a.family() == b.family());
  const auto pa = a.named_params();
  const auto pb = b.named_params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].first == pb[i].first);
    CHECK(pa[i].second == pb[i].second);
  }
  for (double x : {0.05, 0.31, 0.5, 0.77, 0.93}) {
    CHECK(a.pdf(x) == Catch::Approx(b.pdf(x)).margin(1e-14));
  }
}

}  // namespace

TEST_CASE("generator json round trips every family", "[serialize]") {
  const std::vector<Generator> battery = {
      Generator::uniform(),
      Generator::triangular(0.6, 0.25),
      Generator::beta(2.0, 5.0),
      Generator::trunc_normal(0.5, 0.1),
      Generator::kumaraswamy(2.0, 3.0),
      Generator::logit_normal(0.3, 1.2),
      Generator::von_mises(17.19, 0.80),
      Generator::piecewise_constant(8),
      Generator::tabulated({0.0, 2.0, 2.0, 0.0}),
      Generator::mixture(0.25, Generator::beta(2.0, 5.0), Generator::trunc_normal(0.75, 0.05)),
      Generator::mixture(0.6, Generator::uniform(),
                         Generator::mixture(0.5, Generator::von_mises(1.0, 0.0),
                                            Generator::tabulated({1.0, 3.0}))),
  };
  for (const Generator& g : battery) {
    const ordered_json j = generator_to_json(g);
    const Generator back = generator_from_json(j);
    check_same_generator(g, back);
    /* a second trip through text must be byte-stable */
    const ordered_json j2 = ordered_json::parse(generator_to_json(back).dump());
    CHECK(j2.dump() == j.dump());
  }
}

TEST_CASE("generator json schema is stable", "[serialize]") {
  CHECK(generator_to_json(Generator::beta(2.0, 5.0)).dump() ==
        R"({"family":"beta","params":{"alpha":2.0,"beta":5.0}})");
  CHECK(generator_to_json(Generator::uniform()).dump() == R"({"family":"uniform","params":{}})");
  CHECK(generator_to_json(Generator::tabulated({1.0, 3.0})).dump() ==
        R"({"family":"tabulated","values":[0.5,1.5]})");
  const ordered_json mix =
      generator_to_json(Generator::mixture(0.25, Generator::uniform(), Generator::uniform()));
  CHECK(mix["family"] == "mixture");
  CHECK(mix["mixture"]["weight"] == 0.25);
  CHECK(mix["mixture"]["first"]["family"] == "uniform");
  CHECK(mix["mixture"]["second"]["family"] == "uniform");
}

TEST_CASE("generator json rejects malformed input", "[serialize]") {
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"params":{}})")), data_error);
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"family":"cauchy"})")), data_error);
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"family":"beta","params":{"alpha":2.0}})")),
                  data_error);
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"family":"tabulated"})")), data_error);
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"family":"mixture","mixture":{"weight":0.5}})")),
                  data_error);
  /* schema errors surface before value validation, bad values still throw */
  CHECK_THROWS_AS(generator_from_json(ordered_json::parse(R"({"family":"beta","params":{"alpha":-1.0,"beta":2.0}})")),
                  invalid_parameter_error);
}

TEST_CASE("model json round trips and canonicalizes", "[serialize]") {
  const CopulaModel m(Generator::beta(2.0, 5.0), Signature({1, 0, 1}));
  const ordered_json j = model_to_json(m);
  CHECK(j["d"] == 3);
  CHECK(j["signature"] == std::vector<int>{0, 1, 0});  // stored form leads with 0
  const CopulaModel back = model_from_json(j);
  CHECK(back.signature().bits() == m.signature().bits());
  check_same_generator(back.generator(), m.generator());

  /* raw non-canonical input canonicalizes on construction */
  const CopulaModel raw = model_from_json(
      ordered_json::parse(R"({"signature":[1,0],"generator":{"family":"beta","params":{"alpha":2.0,"beta":5.0}}})"));
  CHECK(raw.signature().bits() == std::vector<int>{0, 1});
  CHECK(raw.generator().named_params()[0].second == 5.0);  // reflected to beta(5,2)

  CHECK_THROWS_AS(model_from_json(ordered_json::parse(R"({"signature":[0,1]})")), data_error);
  CHECK_THROWS_AS(
      model_from_json(ordered_json::parse(
          R"({"d":3,"signature":[0,1],"generator":{"family":"uniform","params":{}}})")),
      data_error);
}

TEST_CASE("report json carries every field", "[serialize]") {
  ConcordanceReport r;
  r.rho = 0.125;
  r.tau = -0.25;
  r.xi = 0.0625;
  r.sign_factor = -1;
  r.source = ConcordanceSource::sample;
  r.tie_warning = true;
  const ordered_json j = concordance_to_json(r);
  CHECK(j.dump() ==
        R"({"rho":0.125,"tau":-0.25,"xi":0.0625,"sign_factor":-1,"source":"sample","tie_warning":true})");

  FitReport fit;
  fit.family = "von_mises";
  fit.parameters = {{"phi1", 17.19}, {"phi2", 0.80}};
  fit.log_likelihood = 1234.5;
  fit.aic = -2465.0;
  fit.rho = 0.82;
  fit.tau = 0.63;
  fit.xi = 0.46;
  fit.converged = true;
  fit.boundary_warning = false;
  fit.iterations = 321;
  const ordered_json fj = fit_report_to_json(fit);
  CHECK(fj["family"] == "von_mises");
  CHECK(fj["parameters"]["phi1"] == 17.19);
  CHECK(fj["aic"] == -2465.0);
  CHECK(fj["converged"] == true);
  CHECK(fj["iterations"] == 321);

  const SignatureSelectionReport sel{
      Signature({0, 1}),
      SelectionMethod::cvm,
      {{Signature({0, 0}), 0.4, 0.05}, {Signature({0, 1}), 0.1, 0.01}}};
  const ordered_json sj = selection_report_to_json(sel);
  CHECK(sj["chosen"] == std::vector<int>{0, 1});
  CHECK(sj["method"] == "cvm");
  REQUIRE(sj["table"].size() == 2);
  CHECK(sj["table"][1]["signature"] == std::vector<int>{0, 1});
  CHECK(sj["table"][1]["cvm"] == 0.01);

  KdeEstimate kde;
  kde.grid = {0.0, 0.5, 1.0};
  kde.values = {0.9, 1.2, 0.9};
  kde.bandwidth = 0.07;
  kde.circular = true;
  const ordered_json kj = kde_to_json(kde);
  CHECK(kj["kernel"] == "gaussian");
  CHECK(kj["bandwidth"] == 0.07);
  CHECK(kj["circular"] == true);
  CHECK(kj["grid"].size() == 3);
}

TEST_CASE("double formatting: shortest and 17-digit forms", "[serialize]") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double_17(0.1) == "0.10000000000000001");
  CHECK(format_double_17(2.0) == "2");
  /* 17 significant digits always reproduce the exact bits */
  for (double v : {0.1, 1.0 / 3.0, 0.8200000000000001, 1e-12, 123456.789}) {
    double back = 0.0;
    const std::string s = format_double_17(v);
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("sample csv writes u-columns at full precision", "[serialize]") {
  Matrix m(2, 3);
  m(0, 0) = 0.1;
  m(0, 1) = 0.5;
  m(0, 2) = 1.0 / 3.0;
  m(1, 0) = 0.9;
  m(1, 1) = 0.25;
  m(1, 2) = 2.0 / 3.0;
  const std::string csv = samples_to_csv(m);
  CHECK(csv.substr(0, csv.find('\n')) == "u1,u2,u3");
  CHECK(csv.find("0.10000000000000001") != std::string::npos);

  std::istringstream in(csv);
  const CsvTable table = parse_csv(in);
  REQUIRE(table.header == std::vector<std::string>{"u1", "u2", "u3"});
  REQUIRE(table.values.rows() == 2);
  CHECK(table.values == m);  // bit-exact round trip
}

TEST_CASE("csv parser detects headers, delimiters, and bad cells", "[serialize]") {
  {
    std::istringstream in("x,y\n1,2\n3,4\n");
    const CsvTable t = parse_csv(in);
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    CHECK(t.values.rows() == 2);
    CHECK(t.values(1, 1) == 4.0);
  }
  {
    std::istringstream in("1,2\n3,4\n");
    const CsvTable t = parse_csv(in);
    CHECK(t.header.empty());
    CHECK(t.values.rows() == 2);
  }
  {
    std::istringstream in("a;b\n0.5; 0.25\n");
    const CsvTable t = parse_csv(in, ';');
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.values(0, 1) == 0.25);  // padding around numbers is fine
  }
  {
    std::istringstream in("x,y\r\n1,2\r\n\r\n3,4\r\n");  // CRLF + blank line
    const CsvTable t = parse_csv(in);
    CHECK(t.values.rows() == 2);
  }
  {
    std::istringstream in("x,y\n1,2\n3,oops\n");
    try {
      parse_csv(in);
      FAIL("expected data_error");
    } catch (const data_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 3") != std::string::npos);
      CHECK(msg.find("column 2") != std::string::npos);
    }
  }
  {
    std::istringstream in("x,y\n1,2\n3,4,5\n");
    try {
      parse_csv(in);
      FAIL("expected data_error");
    } catch (const data_error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  {
    std::istringstream in("");
    const CsvTable t = parse_csv(in);
    CHECK(t.values.rows() == 0);
  }
}

TEST_CASE("csv file io round trips and reports missing files", "[serialize]") {
  const std::string path = "serialize_test_tmp.csv";
  write_text_file(path, "u1,u2\n0.5,0.25\n");
  const CsvTable t = read_csv_file(path);
  CHECK(t.values(0, 0) == 0.5);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_csv_file("no_such_file_here.csv"), data_error);
}

TEST_CASE("fit table csv has the fixed column layout", "[serialize]") {
  FitReport a;
  a.family = "beta";
  a.parameters = {{"alpha", 2.0}, {"beta", 5.0}};
  a.rho = 0.125;
  a.tau = 0.0625;
  a.xi = 0.03125;
  a.aic = -12.5;
  FitReport b;
  b.family = "uniform";
  b.aic = 0.0;
  const std::vector<FitReport> fits = {a, b};
  const std::string csv = fit_table_to_csv(fits);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "generator,parameters,rho,tau,xi,aic");
  std::getline(in, line);
  CHECK(line == "beta,\"alpha=2; beta=5\",0.125,0.0625,0.03125,-12.5");
  std::getline(in, line);
  CHECK(line == "uniform,\"\",0,0,0,0");
}

TEST_CASE("content hashes match the git blob convention", "[serialize]") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  /* embedded NUL in the prefix must be preserved */
  CHECK(git_blob_hash("a") != git_blob_hash("b"));
}
