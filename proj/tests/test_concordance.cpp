#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "wrapcop/concordance.hpp"
#include "wrapcop/copula.hpp"
#include "wrapcop/generator.hpp"

using namespace wrapcop;

namespace {

std::vector<Generator> battery() {
  return {
      Generator::uniform(),
      Generator::triangular(1.0, 1.0),
      Generator::triangular(0.8, 0.3),
      Generator::beta(1.5, 1.5),
      Generator::beta(2.0, 5.0),
      Generator::trunc_normal(0.5, 0.1),
      Generator::kumaraswamy(2.0, 1.5),
      Generator::logit_normal(-0.3, 0.7),
      Generator::von_mises(2.0, 1.0),
      Generator::von_mises(-17.19, -0.80),
      Generator::piecewise_constant(5),
      Generator::mixture(0.25, Generator::trunc_normal(0.25, 0.1),
                         Generator::trunc_normal(0.75, 0.1)),
      Generator::tabulated({0.5, 2.0, 1.0, 0.5}),
  };
}

/* histogram approximation of the uniform density on (lo, hi) */
Generator window_density(double lo, double hi, int bins = 512) {
  std::vector<double> v(bins, 0.0);
  for (int j = 0; j < bins; ++j) {
    const double a = static_cast<double>(j) / bins;
    const double b = static_cast<double>(j + 1) / bins;
    const double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    v[j] = overlap * bins / (hi - lo);
  }
  return Generator::tabulated(v);
}

Matrix two_columns(const std::vector<double>& x, const std::vector<double>& y) {
  Matrix m(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    m(i, 0) = x[i];
    m(i, 1) = y[i];
  }
  return m;
}

}  // namespace

TEST_CASE("closed-form concordance of reference models", "[concordance]") {
  const ConcordanceReport indep =
      closed_form_concordance(CopulaModel(Generator::uniform(), Signature({0, 0})));
  CHECK(indep.rho == Catch::Approx(0.0).margin(1e-9));
  CHECK(indep.tau == Catch::Approx(0.0).margin(1e-9));
  CHECK(indep.xi == Catch::Approx(0.0).margin(1e-9));
  CHECK(indep.source == ConcordanceSource::closed_form);

  const ConcordanceReport tri =
      closed_form_concordance(CopulaModel(Generator::triangular(1.0, 1.0), Signature({0, 0})));
  CHECK(tri.rho == Catch::Approx(0.0).margin(1e-9));
  CHECK(tri.tau == Catch::Approx(-1.0 / 45.0).margin(1e-9));
  CHECK(tri.xi == Catch::Approx(1.0 / 15.0).margin(1e-9));

  const CopulaModel beta00(Generator::beta(1.5, 1.5), Signature({0, 0}));
  CHECK(spearman_rho(beta00) == Catch::Approx(0.125).margin(1e-9));
  const CopulaModel beta01(Generator::beta(1.5, 1.5), Signature({0, 1}));
  CHECK(spearman_rho(beta01) == Catch::Approx(-0.125).margin(1e-9));
  CHECK(spearman_rho(CopulaModel(Generator::beta(2.0, 5.0), Signature({0, 0}))) ==
        Catch::Approx(1.0 / 14.0).margin(1e-9));

  // narrow window around 1/2: the Kendall ceiling 1/6 is attained
  const CopulaModel win(window_density(0.25, 0.75), Signature({0, 0}));
  const ConcordanceReport w = closed_form_concordance(win);
  CHECK(w.rho == Catch::Approx(0.375).margin(1e-12));
  CHECK(w.tau == Catch::Approx(1.0 / 6.0).margin(1e-12));
  CHECK(w.xi == Catch::Approx(0.25).margin(1e-12));

  // sharp peaks drive the dependence coefficient toward one
  const double s001 = dss_xi(CopulaModel(Generator::trunc_normal(0.5, 0.01), Signature({0, 0})));
  CHECK(s001 == Catch::Approx(1.0 + 12.0 * 1e-4 - 0.12 / std::sqrt(pi)).margin(3e-4));
  const double s0001 = dss_xi(CopulaModel(Generator::trunc_normal(0.5, 0.001), Signature({0, 0})));
  CHECK(s0001 == Catch::Approx(1.0 + 12.0 * 1e-6 - 0.012 / std::sqrt(pi)).margin(1e-4));
  CHECK(s0001 > 0.99);
}

TEST_CASE("xi, rho and tau satisfy the linear identity", "[concordance]") {
  for (const auto& g : battery()) {
    INFO(family_name(g.family()));
    for (int s2 : {0, 1}) {
      const ConcordanceReport r = closed_form_concordance(CopulaModel(g, Signature({0, s2})));
      CHECK(r.xi == Catch::Approx(r.sign_factor * (2.0 * r.rho - 3.0 * r.tau)).margin(1e-12));
      CHECK(r.sign_factor == (s2 ? -1 : 1));
    }
  }
}

TEST_CASE("signature flips negate rho and tau but fix xi", "[concordance]") {
  for (const auto& g : battery()) {
    INFO(family_name(g.family()));
    const ConcordanceReport a = closed_form_concordance(CopulaModel(g, Signature({0, 0})));
    const ConcordanceReport b = closed_form_concordance(CopulaModel(g, Signature({0, 1})));
    CHECK(b.rho == Catch::Approx(-a.rho).margin(1e-14));
    CHECK(b.tau == Catch::Approx(-a.tau).margin(1e-14));
    CHECK(b.xi == Catch::Approx(a.xi).margin(1e-14));
    // flipping both bits reflects the generator, which leaves all three invariant
    const ConcordanceReport c = closed_form_concordance(CopulaModel(g, Signature({1, 1})));
    CHECK(c.rho == Catch::Approx(a.rho).margin(1e-9));
    CHECK(c.tau == Catch::Approx(a.tau).margin(1e-9));
    CHECK(c.xi == Catch::Approx(a.xi).margin(1e-9));
  }
}

TEST_CASE("attainable ranges of the concordance measures", "[concordance]") {
  for (const auto& g : battery()) {
    INFO(family_name(g.family()));
    const ConcordanceReport r = closed_form_concordance(CopulaModel(g, Signature({0, 0})));
    CHECK(r.rho > -1.0);
    CHECK(r.rho < 0.5);
    CHECK(r.tau <= 1.0 / 6.0 + 1e-9);
    CHECK(r.tau > -1.0);
    CHECK(r.xi >= -1e-12);
    CHECK(r.xi < 1.0);
    // nothing in the battery reaches the window maximizer's tau
    if (g.family() != Family::uniform) {
      CHECK(r.tau < 1.0 / 6.0 - 1e-3);
    }
  }
  // mass concentrated at the half point pushes rho toward its supremum 1/2
  std::vector<double> mid(512, 0.0);
  mid[255] = mid[256] = 1.0;
  const ConcordanceReport hi =
      closed_form_concordance(CopulaModel(Generator::tabulated(mid), Signature({0, 0})));
  CHECK(hi.rho == Catch::Approx(0.5).margin(1e-2));
  // mass at the edges pushes rho toward -1
  std::vector<double> edge(512, 0.0);
  edge[0] = edge[511] = 1.0;
  const ConcordanceReport lo =
      closed_form_concordance(CopulaModel(Generator::tabulated(edge), Signature({0, 0})));
  CHECK(lo.rho == Catch::Approx(-1.0).margin(1e-2));
}

TEST_CASE("numerical oracle agrees with the closed forms", "[concordance]") {
  const ConcordanceReport indep =
      oracle_concordance(CopulaModel(Generator::uniform(), Signature({0, 0})));
  CHECK(indep.rho == Catch::Approx(0.0).margin(1e-6));
  CHECK(indep.tau == Catch::Approx(0.0).margin(1e-6));
  CHECK(indep.xi == Catch::Approx(0.0).margin(1e-6));
  CHECK(indep.source == ConcordanceSource::oracle);

  const ConcordanceReport beta =
      oracle_concordance(CopulaModel(Generator::beta(1.5, 1.5), Signature({0, 0})));
  CHECK(beta.rho == Catch::Approx(0.125).margin(1e-4));

  // cross-validate on a spread of generators, including discontinuous ones
  const std::vector<Generator> subset = {
      Generator::triangular(1.0, 1.0),
      Generator::beta(2.0, 5.0),
      Generator::von_mises(2.0, 1.0),
      Generator::piecewise_constant(5),
      Generator::tabulated({0.5, 2.0, 1.0, 0.5}),
      Generator::mixture(0.25, Generator::trunc_normal(0.25, 0.1),
                         Generator::trunc_normal(0.75, 0.1)),
  };
  for (const auto& g : subset) {
    INFO(family_name(g.family()));
    for (int s2 : {0, 1}) {
      const CopulaModel m(g, Signature({0, s2}));
      const ConcordanceReport cf = closed_form_concordance(m);
      const ConcordanceReport oc = oracle_concordance(m);
      CHECK(oc.rho == Catch::Approx(cf.rho).margin(1e-4));
      CHECK(oc.tau == Catch::Approx(cf.tau).margin(1e-4));
      CHECK(oc.xi == Catch::Approx(cf.xi).margin(1e-4));
    }
  }
}

TEST_CASE("oracle guards", "[concordance]") {
  const CopulaModel m(Generator::uniform(), Signature({0, 0}));
  CHECK_THROWS_AS(oracle_concordance(m, {8, 1}), invalid_parameter_error);
  CHECK_THROWS_AS(
      oracle_concordance(CopulaModel(Generator::uniform(), Signature({0, 0, 0}))),
      dimension_error);
  // unbounded density at the grid edge is reported, not silently averaged
  CHECK_THROWS_AS(
      oracle_concordance(CopulaModel(Generator::beta(0.5, 0.5), Signature({0, 0})), {512, 1}),
      singular_generator_error);

  // grid results do not depend on the thread count
  const CopulaModel vm(Generator::von_mises(2.0, 1.0), Signature({0, 1}));
  const ConcordanceReport one = oracle_concordance(vm, {512, 1});
  const ConcordanceReport two = oracle_concordance(vm, {512, 2});
  CHECK(one.rho == two.rho);
  CHECK(one.tau == two.tau);
  CHECK(one.xi == two.xi);
}

TEST_CASE("sample estimators on hand-checked data", "[concordance]") {
  // strictly increasing pairs
  std::vector<double> x(100), y(100);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 0.01 * static_cast<double>(i + 1);
    y[i] = x[i] * x[i];
  }
  const ConcordanceReport up = sample_concordance(two_columns(x, y));
  CHECK(up.rho == Catch::Approx(1.0).margin(1e-12));
  CHECK(up.tau == Catch::Approx(1.0).margin(1e-12));
  CHECK(up.xi == Catch::Approx(1.0 - 3.0 / 101.0).margin(1e-12));
  CHECK(up.source == ConcordanceSource::sample);
  CHECK_FALSE(up.tie_warning);

  for (auto& v : y) v = -v;
  const ConcordanceReport down = sample_concordance(two_columns(x, y));
  CHECK(down.rho == Catch::Approx(-1.0).margin(1e-12));
  CHECK(down.tau == Catch::Approx(-1.0).margin(1e-12));

  // tie-aware variants on a four-point example worked out by hand
  const ConcordanceReport tied =
      sample_concordance(two_columns({1.0, 1.0, 2.0, 3.0}, {2.0, 1.0, 1.0, 3.0}));
  CHECK(tied.rho == Catch::Approx(0.5).margin(1e-12));
  CHECK(tied.tau == Catch::Approx(0.4).margin(1e-12));
  CHECK(tied.xi == Catch::Approx(0.2).margin(1e-12));
  CHECK(tied.tie_warning);

  CHECK_THROWS_AS(sample_concordance(two_columns({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0})), data_error);
  CHECK_THROWS_AS(sample_concordance(two_columns({1.0, 2.0}, {1.0, 2.0})), data_error);
  CHECK_THROWS_AS(sample_concordance(Matrix(5, 3)), dimension_error);
}

TEST_CASE("sample estimators converge to the model values", "[concordance]") {
  const std::size_t n = 100000;

  const CopulaModel indep(Generator::uniform(), Signature({0, 1}));
  Rng r0(21);
  const ConcordanceReport ir = sample_concordance(indep.sample(r0, 10000));
  CHECK(std::fabs(ir.rho) < 0.05);
  CHECK(std::fabs(ir.tau) < 0.05);
  CHECK(std::fabs(ir.xi) < 0.05);

  const CopulaModel beta(Generator::beta(2.0, 5.0), Signature({0, 1}));
  Rng r1(22);
  const ConcordanceReport bs = sample_concordance(beta.sample(r1, n));
  const ConcordanceReport bc = closed_form_concordance(beta);
  CHECK(bs.rho == Catch::Approx(bc.rho).margin(0.02));
  CHECK(bs.tau == Catch::Approx(bc.tau).margin(0.02));
  CHECK(bs.xi == Catch::Approx(bc.xi).margin(0.02));

  // concentrated generator with one descending coordinate: strong positive link
  const CopulaModel vm(Generator::von_mises(17.19, 0.80), Signature({0, 1}));
  const ConcordanceReport vc = closed_form_concordance(vm);
  CHECK(vc.rho == Catch::Approx(0.82).margin(0.01));
  const ConcordanceReport vo = oracle_concordance(vm);
  CHECK(vo.rho == Catch::Approx(vc.rho).margin(1e-4));
  Rng r2(23);
  const ConcordanceReport vs = sample_concordance(vm.sample(r2, n));
  CHECK(vs.rho == Catch::Approx(vc.rho).margin(0.015));
  CHECK(vs.tau == Catch::Approx(vc.tau).margin(0.015));
  CHECK(vs.xi == Catch::Approx(vc.xi).margin(0.02));
}
