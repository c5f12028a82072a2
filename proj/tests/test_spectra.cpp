#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "subframe/harness.hpp"
#include "subframe/spectra.hpp"

using namespace subframe;
using namespace subframe::testing;

namespace {

Frame correlated_pair(double c) {
  ComplexMatrix m(2, 2);
  m << 1.0, c, 0.0, std::sqrt(1.0 - c * c);
  return Frame(m);
}

}  // namespace

TEST_CASE("ESD of orthonormal sub-frames", "[spectra][esd]") {
  const Frame lpf = sized(FrameFamily::lpf, 4, 12);
  const Esd e = spectra::esd_of(lpf, SelectionMask(12, {0, 3, 6, 9}), Side::gram);
  for (double v : e.eigenvalues()) CHECK_THAT(v, WithinAbs(1.0, 1e-12));

  const Esd h = spectra::esd_of(frames::pentagon_etf(), SelectionMask::full(6), Side::hessian);
  REQUIRE(h.size() == 3);
  for (double v : h.eigenvalues()) CHECK_THAT(v, WithinAbs(2.0, 1e-12));

  const Esd automatic = spectra::esd_of(frames::pentagon_etf(), SelectionMask(6, {0, 1}));
  CHECK(automatic.size() == 2);
  CHECK(automatic.ambient() == Side::gram);

  CHECK_THROWS_AS(spectra::esd_of(lpf, SelectionMask(12, {})), Error);
  CHECK_THROWS_AS(Esd({1.0, -1e-6}, Side::gram), Error);
  CHECK(Esd({1.0, -1e-10}, Side::gram).eigenvalues().front() == 0.0);
}

TEST_CASE("moments and summaries", "[spectra][moments]") {
  CHECK_THAT(spectra::moment_of(Esd({1, 1, 1}, Side::gram), 2, 3), WithinAbs(1.0, 1e-15));
  CHECK_THAT(spectra::moment_of(Esd({0, 0, 0, 2, 2, 2}, Side::gram), 3, 6), WithinAbs(4.0, 1e-15));
  CHECK_THAT(spectra::moment_of(Esd({0.5, 1.5}, Side::gram), 1, 2), WithinAbs(1.0, 1e-15));
  CHECK_THROWS_AS(spectra::moment_of(Esd({1}, Side::gram), 1, 0), Error);

  const auto flat = spectra::summary(Esd({1, 1, 1, 1}, Side::gram), 4);
  CHECK_THAT(flat.esv, WithinAbs(0.0, 1e-15));
  CHECK_FALSE(flat.esk.has_value());

  const auto two = spectra::summary(Esd({0, 2}, Side::gram), 2);
  CHECK_THAT(two.m[0], WithinAbs(1.0, 1e-15));
  CHECK_THAT(two.m[1], WithinAbs(2.0, 1e-15));
  CHECK_THAT(two.esv, WithinAbs(1.0, 1e-15));
  REQUIRE(two.esk.has_value());
  CHECK_THAT(*two.esk, WithinAbs(1.0, 1e-15));
  CHECK(two.lambda_min == 0.0);
  CHECK(two.lambda_max == 2.0);

  // Asymptotic ETF spectral variance at x = 1 reduces to p.
  for (double p : {0.2, 0.5, 0.9}) {
    CHECK_THAT(limits::manova_moment(0.5, p, 2) - p * p, WithinAbs(p, 1e-14));
  }
}

TEST_CASE("moment_of agrees with matrix powers on Bernoulli masks", "[spectra][property]") {
  RngStream rng(4, 0);
  const Frame f = sized(FrameFamily::iid_gaussian, 5, 11, 4);
  for (int t = 0; t < 20; ++t) {
    const auto s = subsets::draw(SelectionModel::bernoulli(0.5), 11, rng);
    if (s.empty()) continue;
    ComplexMatrix p = ComplexMatrix::Zero(11, 11);
    for (int i : s.indices()) p(i, i) = 1.0;
    const ComplexMatrix h = f.matrix() * p * f.matrix().adjoint();
    const Esd e = spectra::esd_of(f, s, Side::hessian);
    ComplexMatrix power = ComplexMatrix::Identity(5, 5);
    for (int r = 1; r <= 5; ++r) {
      power = power * h;
      CHECK_THAT(spectra::moment_of(e, r, 11), WithinAbs(power.trace().real() / 11.0, 1e-9));
    }
  }
}

TEST_CASE("functionals of simple sub-frames", "[spectra][functional]") {
  const Frame id(ComplexMatrix::Identity(3, 3));
  const auto full = SelectionMask::full(3);
  CHECK_THAT(spectra::functional(id, full, FunctionalKind::mse).value, WithinAbs(1.0, 1e-15));
  CHECK_THAT(spectra::functional(id, full, FunctionalKind::shannon).value, WithinAbs(0.0, 1e-15));
  CHECK_THAT(spectra::functional(id, full, FunctionalKind::rip).value, WithinAbs(0.0, 1e-15));
  CHECK_THAT(spectra::functional(id, full, FunctionalKind::cond).value, WithinAbs(1.0, 1e-15));

  const Frame pair = correlated_pair(0.5);
  const auto both = SelectionMask::full(2);
  CHECK_THAT(spectra::functional(pair, both, FunctionalKind::mse).value, WithinAbs(4.0 / 3.0, 1e-12));
  CHECK_THAT(spectra::functional(pair, both, FunctionalKind::rip).value, WithinAbs(0.5, 1e-12));
  CHECK_THAT(spectra::functional(pair, both, FunctionalKind::cond).value, WithinAbs(3.0, 1e-12));
  CHECK(spectra::functional(pair, both, FunctionalKind::strip_indicator, {0.6}).value == 1.0);
  CHECK(spectra::functional(pair, both, FunctionalKind::strip_indicator, {0.4}).value == 0.0);

  FrameParams rep;
  rep.m = 3;
  rep.copies = 2;
  const Frame twice = frames::build(FrameFamily::union_bases, rep);
  const auto dup = spectra::functional(twice, SelectionMask(6, {0, 3}), FunctionalKind::mse);
  CHECK(dup.infinite == 1);
  CHECK(std::isinf(dup.value));
  CHECK(spectra::functional(twice, SelectionMask(6, {0, 3}), FunctionalKind::cond).infinite == 1);

  CHECK_THROWS_AS(spectra::functional(twice, SelectionMask(6, {0, 1}), FunctionalKind::shannon), Error);
  CHECK(spectra::psi_mse(std::vector<double>{1.0, 1e-13}).infinite == 1);
  CHECK(parse_functional("strip") == FunctionalKind::strip_indicator);
  CHECK_THROWS_AS(parse_functional("capacity"), Error);
}

TEST_CASE("means inequalities for the functionals", "[spectra][property]") {
  RngStream rng(9, 0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v;
    const int k = 1 + static_cast<int>(rng.below(8));
    for (int i = 0; i < k; ++i) v.push_back(0.05 + 3.0 * rng.uniform());
    CHECK(spectra::psi_mse(v).value >= 1.0);
    CHECK(spectra::psi_shannon(v).value <= 0.0);
  }
  const std::vector<double> equal(5, 1.7);
  CHECK_THAT(spectra::psi_mse(equal).value, WithinAbs(1.0, 1e-12));
  CHECK_THAT(spectra::psi_shannon(equal).value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("subset averages", "[spectra][average]") {
  const Frame f = dss7();
  const auto ls = spectra::subset_average(f, SelectionModel::combinatorial(7), FunctionalKind::shannon, {}, 0, nullptr);
  CHECK(ls.exact);
  CHECK_THAT(ls.mean, WithinAbs(0.0, 1e-12));
  const auto l1 = spectra::subset_average(f, SelectionModel::combinatorial(1), FunctionalKind::mse, {}, 0, nullptr);
  CHECK_THAT(l1.mean, WithinAbs(0.0, 1e-12));

  const Frame id(ComplexMatrix::Identity(4, 4));
  FunctionalParams strict;
  strict.delta = 1.0;
  const auto strip = spectra::subset_average(id, SelectionModel::combinatorial(2), FunctionalKind::strip_indicator, strict, 0, nullptr);
  CHECK(strip.mean == 1.0);

  const RngStream rng(3, 0);
  const Frame g = sized(FrameFamily::iid_gaussian, 6, 14, 1);
  const auto a = spectra::subset_average(g, SelectionModel::combinatorial(4), FunctionalKind::mse, {}, 64, &rng);
  const auto b = spectra::subset_average(g, SelectionModel::combinatorial(4), FunctionalKind::mse, {}, 64, &rng);
  CHECK(a.mean == b.mean);
  CHECK(a.half_width > 0.0);
  CHECK(a.samples == 64);
  CHECK_THROWS_AS(spectra::subset_average(g, SelectionModel::combinatorial(4), FunctionalKind::mse, {}, 1, &rng), Error);
}

TEST_CASE("pair-subset MSE bound, with equality for ETFs", "[spectra][property]") {
  auto bound = [](const Frame& f) {
    return std::log(static_cast<double>((f.n() - 1) * f.m()) / ((f.m() - 1) * f.n()));
  };
  for (const Frame& f : {dss7(), frames::pentagon_etf(), paley(FrameFamily::paley_complex, 7)}) {
    const auto l2 = spectra::subset_average(f, SelectionModel::combinatorial(2), FunctionalKind::mse, {}, 0, nullptr);
    CHECK_THAT(l2.mean, WithinAbs(bound(f), 1e-9));
  }
  for (const Frame& f : harness::small_frame_zoo(5)) {
    if (f.m() < 2) continue;
    const auto l2 = spectra::subset_average(f, SelectionModel::combinatorial(2), FunctionalKind::mse, {}, 0, nullptr);
    if (l2.infinite_count > 0) continue;
    CHECK(l2.mean >= bound(f) - 1e-9);
  }
}

TEST_CASE("KS distance between step functions", "[spectra][ks]") {
  const Esd a({0, 2}, Side::gram);
  const Esd b({0, 1, 2}, Side::gram);
  CHECK_THAT(spectra::ks_distance(a, a), WithinAbs(0.0, 1e-15));
  CHECK_THAT(spectra::ks_distance(a, b), WithinAbs(1.0 / 6.0, 1e-15));
  CHECK_THAT(spectra::ks_distance(b, a), WithinAbs(1.0 / 6.0, 1e-15));

  RngStream rng(6, 0);
  auto random_esd = [&]() {
    std::vector<double> v(1 + rng.below(12));
    for (double& x : v) x = std::floor(rng.uniform() * 6.0) / 2.0;
    return Esd(v, Side::gram);
  };
  for (int t = 0; t < 300; ++t) {
    const Esd x = random_esd();
    const Esd y = random_esd();
    const Esd z = random_esd();
    const double xy = spectra::ks_distance(x, y);
    CHECK(xy == spectra::ks_distance(y, x));
    CHECK(spectra::ks_distance(x, z) <= xy + spectra::ks_distance(y, z) + 1e-12);
  }
}

TEST_CASE("KS distance against a law sees both sides of every jump", "[spectra][ks]") {
  const LimitLaw law = LimitLaw::manova(0.5, 1.0);  // arcsine law on [0, 2]
  const Esd one({1.0}, Side::gram);
  CHECK_THAT(spectra::ks_distance(one, law), WithinAbs(0.5, 1e-6));
  const LimitLaw atom = LimitLaw::manova(0.6, 1.5);
  const Esd at_atom({1.0 / 0.6}, Side::gram);
  // Below the atom the law has mass 1/3 + 1/9, the ESD has 0.
  CHECK_THAT(spectra::ks_distance(at_atom, atom), WithinAbs(4.0 / 9.0, 1e-6));
}

TEST_CASE("MANOVA ensemble spectra are close to the law", "[spectra][ks][property]") {
  const LimitLaw law = LimitLaw::manova(0.5, 0.8);
  int below = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    RngStream rng(seed, 99);
    const Esd e(harness::manova_ensemble_sample(1000, 500, 400, rng), Side::gram);
    if (spectra::ks_distance(e, law) < 0.1) ++below;
  }
  CHECK(below == 8);
}

TEST_CASE("ESD CSV round trip", "[spectra][io]") {
  const Esd e({0.125, 0.5, 1.75, 3.0}, Side::gram);
  const auto path = std::filesystem::temp_directory_path() / "subframe_test_esd.csv";
  spectra::write_esd_csv(e, path);
  const Esd back = spectra::read_esd_csv(path);
  CHECK(back.eigenvalues() == e.eigenvalues());
  std::filesystem::remove(path);
  const auto j = spectra::summary_to_json(spectra::summary(e, 4), 4);
  CHECK(j.contains("esv"));
}
