#include <cmath>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "subframe/limits.hpp"

using namespace subframe;
using namespace subframe::testing;

// Reference values below come from independent 30-digit mpmath quadrature of
// the Wachter and Marchenko-Pastur densities.

TEST_CASE("support edges and atoms", "[limits]") {
  const LimitLaw a = LimitLaw::manova(0.5, 1.0);
  CHECK_THAT(a.lambda_minus(), WithinAbs(0.0, 1e-15));
  CHECK_THAT(a.lambda_plus(), WithinAbs(2.0, 1e-15));
  CHECK(a.atom_mass() == 0.0);
  CHECK(a.zero_atom_mass() == 0.0);

  const LimitLaw b = LimitLaw::manova(0.3, 0.7);
  CHECK_THAT(b.lambda_minus(), WithinAbs(0.035652781575817561, 1e-15));
  CHECK_THAT(b.lambda_plus(), WithinAbs(2.5243472184241824, 1e-14));

  const LimitLaw c = LimitLaw::manova(0.6, 1.5);
  CHECK_THAT(c.atom_mass(), WithinAbs(5.0 / 9.0, 1e-15));
  CHECK_THAT(c.zero_atom_mass(), WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(c.atom_location(), WithinAbs(1.0 / 0.6, 1e-15));

  const LimitLaw mp = LimitLaw::mp(1.0);
  CHECK(mp.density(4.0 + 1e-9) == 0.0);
  CHECK(std::isnan(mp.atom_location()));
  CHECK_THAT(LimitLaw::mp(0.5).lambda_minus(), WithinAbs(0.085786437626904951, 1e-15));
}

TEST_CASE("density oracles", "[limits][oracle]") {
  const LimitLaw b = LimitLaw::manova(0.3, 0.7);
  CHECK_THAT(b.density(0.2), WithinRel(0.74747371254002792, 1e-12));
  CHECK_THAT(b.density(1.5), WithinRel(0.33753108278514117, 1e-12));
  const LimitLaw c = LimitLaw::manova(0.6, 1.5);
  CHECK_THAT(c.density(0.5), WithinRel(0.13557381779374801, 1e-12));
  const LimitLaw mp = LimitLaw::mp(0.5);
  CHECK_THAT(mp.density(1.0), WithinRel(0.42108439934779239, 1e-12));
}

TEST_CASE("CDF oracles, cached and direct", "[limits][oracle]") {
  struct Case {
    LimitLaw law;
    double x;
    double expected;
  };
  const std::vector<Case> cases{
      {LimitLaw::manova(0.3, 0.7), 0.2, 0.13972816954377722},
      {LimitLaw::manova(0.3, 0.7), 0.8, 0.46357462065830719},
      {LimitLaw::manova(0.3, 0.7), 2.5, 0.99853926323309382},
      {LimitLaw::manova(0.5, 0.5), 0.3, 0.092263851929480701},
      {LimitLaw::manova(0.6, 1.5), 0.5, 1.0 / 3.0 + 0.034964532736699448},
      {LimitLaw::manova(0.6, 1.5), 1.6, 1.0 / 3.0 + 1.0 / 9.0},
      {LimitLaw::mp(0.5), 0.2, 0.092151803216002451},
      {LimitLaw::mp(0.5), 2.5, 0.96589350383422395},
  };
  for (const auto& c : cases) {
    INFO(to_string(c.law.family()) << " gamma=" << c.law.gamma() << " beta=" << c.law.beta() << " x=" << c.x);
    CHECK_THAT(c.law.cdf(c.x), WithinAbs(c.expected, 1e-9));
    CHECK_THAT(c.law.cdf_direct(c.x), WithinAbs(c.expected, 1e-8));
  }
}

TEST_CASE("CDF limits and symmetry", "[limits]") {
  const LimitLaw a = LimitLaw::manova(0.5, 1.0);
  CHECK_THAT(a.cdf(1.0), WithinAbs(0.5, 1e-6));
  CHECK(a.cdf(-0.1) == 0.0);
  CHECK_THAT(a.cdf(2.5), WithinAbs(1.0, 1e-6));

  const LimitLaw c = LimitLaw::manova(0.6, 1.5);
  CHECK_THAT(c.cdf(c.atom_location()), WithinAbs(1.0, 1e-6));
  CHECK_THAT(c.cdf_left(c.atom_location()), WithinAbs(4.0 / 9.0, 1e-6));
  CHECK_THAT(c.cdf(0.0), WithinAbs(1.0 / 3.0, 1e-12));
  CHECK(c.cdf_left(0.0) == 0.0);

  const LimitLaw s = LimitLaw::manova(0.5, 0.7);
  const double mid = 0.5 * (s.lambda_minus() + s.lambda_plus());
  const double half = 0.5 * (s.lambda_plus() - s.lambda_minus());
  for (int i = 1; i <= 100; ++i) {
    const double t = half * i / 101.0;
    CHECK_THAT(s.density(mid + t), WithinAbs(s.density(mid - t), 1e-9));
  }
}

TEST_CASE("CDF is monotone", "[limits][property]") {
  for (const LimitLaw& law : {LimitLaw::manova(0.2, 0.4), LimitLaw::manova(0.7, 1.3), LimitLaw::mp(2.0)}) {
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = -0.1 + (law.lambda_plus() + 2.0) * i / 2000.0;
      const double v = law.cdf(x);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("closed-form MANOVA moments", "[limits][moments]") {
  for (double p : {0.1, 0.4, 0.75}) {
    for (double g : {0.25, 0.5, 0.8}) {
      const double x = 1.0 / g - 1.0;
      CHECK_THAT(limits::manova_moment(g, p, 1), WithinAbs(p, 1e-14));
      CHECK_THAT(limits::manova_moment(g, p, 2), WithinAbs(p + p * p * x, 1e-14));
    }
  }
  CHECK(limits::manova_moment_exact(Rational(1, 2), Rational(1, 2), 4) == Rational(35, 16));
  CHECK_THAT(LimitLaw::manova(0.5, 1.0).moment(4), WithinAbs(2.1875, 1e-14));
  // p = 1 selects every column of a tight frame: (1/n) tr((n/m) I_m)^r = gamma^(1-r).
  Rational expected = 1;
  for (int r = 1; r <= 8; ++r) {
    CHECK(limits::manova_moment_exact(Rational(2, 5), Rational(1), r) == expected);
    expected *= Rational(5, 2);
    CHECK(limits::manova_moment_exact(Rational(2, 5), Rational(0), r) == 0);
  }
  CHECK_THROWS_AS(limits::manova_moment_exact(Rational(1, 2), Rational(1, 2), 0), Error);
  CHECK_THROWS_AS(limits::manova_moment_exact(Rational(1), Rational(1, 2), 2), Error);
}

TEST_CASE("Narayana numbers", "[limits][narayana]") {
  CHECK(limits::narayana(4, 2) == 6);
  const auto table = limits::narayana_table(12);
  for (int j = 1; j <= 12; ++j) {
    Rational sum = 0;
    for (int i = 1; i <= j; ++i) sum += table.at(j, i);
    CHECK(sum == Rational(limits::catalan(j)));
  }
  CHECK(limits::mp_moment_exact(Rational(1), 3) == 5);
}

TEST_CASE("mass and moment self-consistency over the parameter grid", "[limits][property]") {
  for (int gi = 1; gi <= 9; ++gi) {
    for (int bi = 1; bi <= 15; ++bi) {
      const double g = gi / 10.0;
      const double b = bi / 10.0;
      if (b * g > 1.0) continue;
      const LimitLaw law = LimitLaw::manova(g, b);
      INFO("gamma=" << g << " beta=" << b);
      CHECK_THAT(law.continuous_mass() + law.atom_mass() + law.zero_atom_mass(), WithinAbs(1.0, 1e-6));
      for (int r = 1; r <= 6; ++r) {
        CHECK_THAT(law.quadrature_moment(r, 1e-10), WithinAbs(law.raw_moment(r), 1e-6));
      }
    }
  }
}

TEST_CASE("MANOVA degenerates to Marchenko-Pastur as gamma -> 0", "[limits][property]") {
  // The gap is first order in gamma and scales with the moment, so the
  // agreement is relative.
  for (int bi = 1; bi <= 15; ++bi) {
    const double b = bi / 10.0;
    const LimitLaw manova = LimitLaw::manova(1e-3, b);
    const LimitLaw mp = LimitLaw::mp(b);
    for (int r = 1; r <= 4; ++r) {
      INFO("beta=" << b << " r=" << r);
      CHECK_THAT(manova.raw_moment(r), WithinRel(mp.quadrature_moment(r, 1e-10), 1e-2));
    }
  }
}

TEST_CASE("functional integrals", "[limits][functional]") {
  const LimitLaw b = LimitLaw::manova(0.3, 0.7);
  auto generic = [](const LimitLaw& law, std::function<double(double)> g) {
    return limits::functional_integral(law, limits::FunctionalKind::generic, 1e-10, std::move(g)).value;
  };
  CHECK_THAT(generic(b, [](double) { return 1.0; }), WithinAbs(1.0, 1e-6));
  CHECK_THAT(generic(b, [](double x) { return x; }), WithinAbs(b.raw_moment(1), 1e-6));
  const LimitLaw c = LimitLaw::manova(0.6, 1.5);
  CHECK_THAT(generic(c, [](double x) { return x; }), WithinAbs(c.raw_moment(1), 1e-6));

  CHECK_THAT(limits::functional_integral(b, limits::FunctionalKind::mse, 1e-10).value, WithinAbs(79.0 / 30.0, 1e-7));
  CHECK_THAT(limits::functional_integral(LimitLaw::manova(0.5, 0.5), limits::FunctionalKind::mse, 1e-10).value,
             WithinAbs(1.5, 1e-7));
  CHECK_THAT(limits::functional_integral(LimitLaw::mp(0.5), limits::FunctionalKind::mse, 1e-10).value,
             WithinAbs(2.0, 1e-7));

  const auto edge = limits::functional_integral(LimitLaw::manova(0.5, 1.0), limits::FunctionalKind::mse, 1e-10);
  CHECK(edge.infinite == 1);
  CHECK(limits::functional_integral(c, limits::FunctionalKind::mse, 1e-10).infinite == 1);

  const auto wide = limits::functional_integral(b, limits::FunctionalKind::shannon, 1e-10);
  CHECK(wide.infinite == -1);
  CHECK_THAT(limits::functional_integral(c, limits::FunctionalKind::shannon, 1e-10).value,
             WithinAbs(-0.061554343582048476, 1e-7));
}

TEST_CASE("law construction errors and CSV export", "[limits]") {
  CHECK_THROWS_AS(LimitLaw::manova(1.0, 0.5), Error);
  CHECK_THROWS_AS(LimitLaw::manova(0.5, 0.0), Error);
  CHECK_THROWS_AS(LimitLaw::manova(0.5, 2.5), Error);
  CHECK_THROWS_AS(LimitLaw::mp(-1.0), Error);
  CHECK_THROWS_AS(LimitLaw::manova(0.5, 0.5).moment(0), Error);
  CHECK(parse_law_family("mp") == LawFamily::mp);

  const auto path = std::filesystem::temp_directory_path() / "subframe_test_law.csv";
  limits::write_law_csv(LimitLaw::manova(0.4, 0.9), path, 64);
  std::ifstream in(path);
  std::string line;
  int data = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("x,density,cdf", 0) == 0) header = true;
    else if (!line.empty() && line[0] != '#') ++data;
  }
  CHECK(header);
  CHECK(data == 64);
  std::filesystem::remove(path);
}
