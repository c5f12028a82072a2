#include <cmath>
#include <numeric>

#include "support.hpp"
#include "subframe/subsets.hpp"

using namespace subframe;
using namespace subframe::testing;

TEST_CASE("degenerate Bernoulli draws", "[subsets]") {
  RngStream rng(1, 0);
  for (int i = 0; i < 20; ++i) {
    CHECK(subsets::draw(SelectionModel::bernoulli(0.0), 9, rng).empty());
    CHECK(subsets::draw(SelectionModel::bernoulli(1.0), 9, rng).size() == 9);
  }
}

TEST_CASE("combinatorial draws include each index with frequency k/n", "[subsets][property]") {
  RngStream rng(2, 0);
  const int n = 10;
  const int k = 3;
  const int draws = 100000;
  std::vector<int> hits(n, 0);
  for (int i = 0; i < draws; ++i) {
    const auto s = subsets::draw(SelectionModel::combinatorial(k), n, rng);
    REQUIRE(s.size() == k);
    for (int idx : s.indices()) ++hits[idx];
  }
  const double p = static_cast<double>(k) / n;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int h : hits) CHECK(std::abs(h - draws * p) <= 4 * sigma);
  CHECK_THROWS_AS(subsets::draw(SelectionModel::combinatorial(11), n, rng), Error);
}

TEST_CASE("sub-frame Gram and Hessian", "[subsets]") {
  const Frame f = dss7();
  const auto one = subsets::subframe_gram(f, SelectionMask(7, {4}));
  CHECK_THAT(std::abs(one.gram(0, 0) - 1.0), WithinAbs(0.0, 1e-12));

  const Frame g = sized(FrameFamily::iid_gaussian, 4, 9, 5);
  for (int i = 0; i < 9; ++i) {
    for (int j = i + 1; j < 9; ++j) {
      const auto sm = subsets::subframe_gram(g, SelectionMask(9, {i, j}));
      const double c = std::abs(sm.gram(0, 1));
      const auto v = numerics::herm_eigvals(sm.gram);
      CHECK_THAT(v[0], WithinAbs(1.0 - c, 1e-12));
      CHECK_THAT(v[1], WithinAbs(1.0 + c, 1e-12));
    }
  }

  const auto full = subsets::subframe_gram(f, SelectionMask::full(7));
  CHECK(numerics::max_abs(full.hessian - (7.0 / 3.0) * ComplexMatrix::Identity(3, 3)) <= 1e-9);

  const auto empty = subsets::subframe_gram(f, SelectionMask(7, {}));
  CHECK(empty.empty);
  CHECK(empty.gram.size() == 0);
  CHECK(numerics::max_abs(empty.hessian) == 0.0);
}

TEST_CASE("Gram and Hessian share nonzero eigenvalues", "[subsets][property]") {
  RngStream rng(3, 0);
  const Frame f = sized(FrameFamily::haar, 5, 12, 3);
  for (int t = 0; t < 50; ++t) {
    const int k = 1 + static_cast<int>(rng.below(12));
    const auto s = subsets::draw(SelectionModel::combinatorial(k), 12, rng);
    const auto sm = subsets::subframe_gram(f, s);
    CHECK_THAT(sm.gram.trace().real(), WithinAbs(k, 1e-10));
    auto a = numerics::herm_eigvals(sm.gram);
    auto b = numerics::herm_eigvals(sm.hessian);
    const std::size_t r = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < r; ++i) {
      CHECK_THAT(a[a.size() - 1 - i], WithinAbs(b[b.size() - 1 - i], 1e-9));
    }
  }
}

TEST_CASE("exact expectation oracles", "[subsets]") {
  const Frame f = dss7();
  const double p = 0.37;
  const auto size = subsets::exact_expectation(
      7, SelectionModel::bernoulli(p), [](const SelectionMask& s) { return s.size() / 7.0; });
  CHECK_THAT(size.mean, WithinAbs(p, 1e-15));
  CHECK(size.count == 128);

  const auto bern = SelectionModel::bernoulli(0.5);
  CHECK_THAT(subsets::exact_expectation(7, bern, subsets::trace_moment_statistic(f, 1)).mean,
             WithinAbs(0.5, 1e-14));
  CHECK_THAT(subsets::exact_expectation(7, bern, subsets::trace_moment_statistic(f, 2)).mean,
             WithinAbs(5.0 / 6.0, 1e-14));
}

TEST_CASE("Gray-code moment enumeration matches direct enumeration", "[subsets][property]") {
  for (const Frame& f : {dss7(), sized(FrameFamily::iid_gaussian, 4, 10, 7), frames::pentagon_etf()}) {
    for (double p : {0.25, 0.6}) {
      const auto model = SelectionModel::bernoulli(p);
      const auto fast = subsets::exact_moments(f, model, 4);
      for (int r = 1; r <= 4; ++r) {
        const auto slow = subsets::exact_expectation(f.n(), model, subsets::trace_moment_statistic(f, r));
        CHECK_THAT(fast.mean[r - 1], WithinAbs(slow.mean, 1e-12));
        CHECK_THAT(fast.variance[r - 1], WithinAbs(slow.variance, 1e-12));
      }
    }
    const auto comb = SelectionModel::combinatorial(f.m());
    const auto fast = subsets::exact_moments(f, comb, 3);
    const auto slow = subsets::exact_expectation(f.n(), comb, subsets::trace_moment_statistic(f, 3));
    CHECK_THAT(fast.mean[2], WithinAbs(slow.mean, 1e-12));
  }
}

TEST_CASE("ETF moments are invariant under column permutations", "[subsets][property]") {
  const Frame f = dss7();
  ComplexMatrix permuted(3, 7);
  const std::vector<int> perm{3, 6, 0, 5, 1, 4, 2};
  for (int j = 0; j < 7; ++j) permuted.col(j) = f.matrix().col(perm[j]);
  const Frame g(permuted);
  const auto a = subsets::exact_moments(f, SelectionModel::bernoulli(0.3), 4);
  const auto b = subsets::exact_moments(g, SelectionModel::bernoulli(0.3), 4);
  for (int r = 0; r < 4; ++r) CHECK_THAT(a.mean[r], WithinAbs(b.mean[r], 1e-13));
}

TEST_CASE("subset average of F_S F_S^H is (k/n) F F^H", "[subsets][property]") {
  const Frame f = sized(FrameFamily::iid_gaussian, 4, 8, 12);
  const ComplexMatrix target = (3.0 / 8.0) * f.matrix() * f.matrix().adjoint();
  ComplexMatrix mean = ComplexMatrix::Zero(4, 4);
  double total = 0.0;
  subsets::for_each_mask(SelectionModel::combinatorial(3), 8, [&](const SelectionMask& s, double w) {
    mean += w * subsets::subframe_gram(f, s).hessian;
    total += w;
  });
  CHECK_THAT(total, WithinAbs(1.0, 1e-14));
  CHECK(numerics::max_abs(mean - target) <= 1e-10);
}

TEST_CASE("enumeration weights and caps", "[subsets]") {
  double total = 0.0;
  std::size_t count = 0;
  subsets::for_each_mask(SelectionModel::bernoulli(0.3), 10, [&](const SelectionMask&, double w) {
    total += w;
    ++count;
  });
  CHECK(count == 1024);
  CHECK_THAT(total, WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(subsets::check_enumeration_cap(SelectionModel::bernoulli(0.5), 25), Error);
  CHECK_THROWS_AS(subsets::check_enumeration_cap(SelectionModel::combinatorial(20), 40), Error);
  CHECK_NOTHROW(subsets::check_enumeration_cap(SelectionModel::combinatorial(5), 20));
  CHECK(subsets::binomial(10, 3) == 120.0);
}

TEST_CASE("selection parsing and masks", "[subsets]") {
  const auto c = parse_selection("comb:5");
  CHECK(c.mode == SelectionModel::Mode::combinatorial);
  CHECK(c.k == 5);
  const auto b = parse_selection("bern:1/4");
  CHECK(b.mode == SelectionModel::Mode::bernoulli);
  CHECK(b.p == 0.25);
  CHECK(to_string(b) == "bern:0.25");
  CHECK_THROWS_AS(parse_selection("k=5"), Error);
  CHECK_THROWS_AS(parse_selection("comb:2.5"), Error);
  CHECK_THROWS_AS(SelectionModel::bernoulli(1.5).validate(4), Error);

  CHECK_THROWS_AS(SelectionMask(5, {2, 1}), Error);
  CHECK_THROWS_AS(SelectionMask(5, {5}), Error);
  const SelectionMask m(6, {0, 2, 5});
  CHECK(subsets::mask_from_json(subsets::mask_to_json(m), 6).indices() == m.indices());
}
