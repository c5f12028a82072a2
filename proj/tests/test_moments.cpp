#include <cmath>
#include <numeric>

#include "support.hpp"
#include "subframe/limits.hpp"
#include "subframe/moments.hpp"
#include "subframe/subsets.hpp"

using namespace subframe;
using namespace subframe::testing;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

BigInt stirling2(int r, int t) {
  if (r == 0 && t == 0) return 1;
  if (r == 0 || t == 0) return 0;
  return t * stirling2(r - 1, t) + stirling2(r - 1, t - 1);
}

}  // namespace

TEST_CASE("expected ETF moments: worked examples", "[moments][oracle]") {
  // 7-point difference-set frame, gamma = 3/7, p = 1/2: 1/2 + (1/4)(4/3).
  CHECK(moments::etf_expected_moment(MomentContext(q(3, 7), q(1, 2), 7), 2) == q(5, 6));
  CHECK(moments::etf_expected_moment(MomentContext(q(3, 7), q(1, 2), 7), 1) == q(1, 2));
  // n = 6, x = 1, p = 1/2: 35/16 + 1/80.
  CHECK(moments::etf_expected_moment(MomentContext(q(1, 2), q(1, 2), 6), 4) == q(11, 5));
  CHECK(moments::etf_moment_variance(MomentContext(q(3, 7), q(1, 2), 7), 1) == q(1, 28));
}

TEST_CASE("expected ETF moments agree with exhaustive enumeration", "[moments][oracle]") {
  const Frame f = dss7();
  for (const Rational& p : {q(1, 4), q(1, 2), q(3, 4)}) {
    const auto e = subsets::exact_moments(f, SelectionModel::bernoulli(numerics::to_double(p)), 4);
    const MomentContext ctx(q(3, 7), p, 7);
    for (int r = 1; r <= 4; ++r) {
      CHECK_THAT(e.mean[static_cast<std::size_t>(r - 1)],
                 WithinAbs(numerics::to_double(moments::etf_expected_moment(ctx, r)), 1e-12));
    }
    for (int r = 1; r <= 2; ++r) {
      CHECK_THAT(e.variance[static_cast<std::size_t>(r - 1)],
                 WithinAbs(numerics::to_double(moments::etf_moment_variance(ctx, r)), 1e-12));
    }
  }
}

TEST_CASE("moment formula preconditions", "[moments]") {
  CHECK_THROWS_AS(MomentContext(q(1), q(1, 2)), Error);
  CHECK_THROWS_AS(MomentContext(q(1, 2), q(3, 2)), Error);
  CHECK_THROWS_AS(MomentContext(q(1, 3), q(1, 2), 7), Error);
  CHECK_THROWS_AS(moments::etf_expected_moment(MomentContext(q(1, 2), q(1, 2)), 2), Error);
  CHECK_THROWS_AS(moments::etf_expected_moment(MomentContext(q(1, 2), q(1, 2), 6), 5), Error);
  CHECK_THROWS_AS(moments::etf_moment_variance(MomentContext(q(1, 2), q(1, 2), 6), 3), Error);
  CHECK_THROWS_AS(moments::ewb_bound(MomentContext(q(1, 2), q(1, 2), 6), 1), Error);
  CHECK_THROWS_AS(moments::esv_esk_bounds(MomentContext(q(1, 2), q(1))), Error);
}

TEST_CASE("A-sequence values", "[moments][asequence]") {
  const ASequence half = moments::a_sequence(q(1, 2), 8);
  const std::vector<Rational> expected{0, 1, 0, -1, 0, 2, 0, -5};
  for (int s = 1; s <= 8; ++s) {
    CHECK(half.at(s).v() == 0);
    CHECK(half.at(s).u() == expected[static_cast<std::size_t>(s - 1)]);
  }
  CHECK_THROWS_AS(half.at(9), Error);

  // x = 2: A_1 = -sqrt(2)/4, A_3 = -2 A_1.
  const ASequence third = moments::a_sequence(q(1, 3), 3);
  CHECK(third.at(1) == Surd(0, q(-1, 4), 2));
  CHECK(third.at(3) == third.at(1) * q(-2));

  // x = 4 is a square, so A_1 folds to a rational.
  const ASequence fifth = moments::a_sequence(q(1, 5), 2);
  CHECK(fifth.at(1).v() == 0);
  CHECK(fifth.at(1).u() == q(-3, 4));
  CHECK_THROWS_AS(moments::a_sequence(q(1, 2), 1), Error);
}

TEST_CASE("A-sequence are the free cumulants of a two-point law", "[moments][asequence][property]") {
  // The centred Gram spectrum has atoms +-1/(2 gamma sqrt(x)) with masses
  // gamma and 1 - gamma; its moments satisfy m_r = sum over non-crossing
  // partitions of products of A over block sizes.
  for (const Rational& g : {q(1, 5), q(1, 3), q(2, 5), q(3, 5)}) {
    const ASequence a = moments::a_sequence(g, 6);
    const double gd = numerics::to_double(g);
    const double xd = 1.0 / gd - 1.0;
    const double h = 1.0 / (2.0 * gd * std::sqrt(xd));
    for (int r = 1; r <= 6; ++r) {
      const double two_point = gd * std::pow(h, r) + (1.0 - gd) * std::pow(-h, r);
      double free_sum = 0.0;
      for (int t = 1; t <= r; ++t) {
        for (const auto& pi : moments::enumerate_partitions(r, t)) {
          std::vector<int> sizes(static_cast<std::size_t>(t), 0);
          for (int b : pi.block_of) ++sizes[static_cast<std::size_t>(b)];
          if (!moments::classify(pi).is_noncrossing) continue;
          double prod = 1.0;
          for (int s : sizes) prod *= a.at(s).to_double();
          free_sum += prod;
        }
      }
      INFO("gamma=" << numerics::to_string(g) << " r=" << r);
      CHECK_THAT(free_sum, WithinAbs(two_point, 1e-12));
    }
  }
}

TEST_CASE("partition enumeration and classification", "[moments][partitions]") {
  CHECK(moments::enumerate_partitions(4, 2).size() == 7);
  CHECK(moments::enumerate_partitions(5, 3).size() == 25);

  const CycleProfile crossing = moments::classify(Partition{4, 2, {0, 1, 0, 1}});
  CHECK_FALSE(crossing.is_noncrossing);
  CHECK(crossing.cycle_lengths.empty());

  const CycleProfile nested = moments::classify(Partition{5, 3, {0, 0, 1, 2, 1}});
  CHECK(nested.is_noncrossing);
  CHECK(nested.cycle_lengths == std::vector<int>{2, 2, 1});

  CHECK_THROWS_AS(moments::classify(Partition{3, 2, {0, 2, 1}}), Error);
  CHECK_THROWS_AS(moments::classify(Partition{3, 3, {0, 1, 1}}), Error);
  CHECK_THROWS_AS(moments::enumerate_partitions(11, 2), Error);
  CHECK_THROWS_AS(moments::enumerate_partitions(4, 2, 13), Error);
  CHECK_THROWS_AS(moments::enumerate_partitions(4, 5), Error);
}

TEST_CASE("partition counts: Bell, Stirling, Catalan, Narayana", "[moments][partitions][property]") {
  for (int r = 1; r <= 10; ++r) {
    std::size_t total = 0;
    BigInt noncrossing = 0;
    const auto& census = moments::partition_census(r);
    for (int t = 1; t <= r; ++t) {
      const auto parts = moments::enumerate_partitions(r, t);
      CHECK(BigInt(parts.size()) == stirling2(r, t));
      total += parts.size();
      BigInt nc_t = 0;
      for (const auto& [key, count] : census) {
        if (key.first == t) nc_t += count;
      }
      CHECK(nc_t == limits::narayana(r, t));
      noncrossing += nc_t;
    }
    CHECK(BigInt(total) == [&] {
      BigInt bell = 0;
      for (int t = 1; t <= r; ++t) bell += stirling2(r, t);
      return bell;
    }());
    CHECK(noncrossing == limits::catalan(r));
  }
}

TEST_CASE("partition values", "[moments][partitions]") {
  const ASequence a = moments::a_sequence(q(1, 3), 4);
  const Surd nested = moments::partition_value(CycleProfile{true, {2, 2, 1}}, a);
  CHECK(nested == a.at(1));
  CHECK(moments::partition_value(CycleProfile{false, {}}, a).is_zero());
  const Surd pair = moments::partition_value(CycleProfile{true, {1, 1}}, a);
  CHECK(pair.v() == 0);
  CHECK(pair.u() == q(1, 8));
}

TEST_CASE("central and asymptotic moments", "[moments][identity]") {
  const MomentContext half(q(1, 2), q(1, 2));
  const RationalPolynomial a2 = moments::asymptotic_moment(half, 2);
  REQUIRE(a2.coeffs.size() == 3);
  CHECK(a2.coeffs[0] == 0);
  CHECK(a2.coeffs[1] == 1);
  CHECK(a2.coeffs[2] == 1);
  CHECK(a2.evaluate(q(1, 2)) == q(3, 4));

  // Central moments vanish at p = 0 and sum with the shift to the MANOVA moments.
  for (int r = 1; r <= 6; ++r) {
    CHECK(moments::central_moment(half, r).evaluate(0).is_zero());
  }
  CHECK(moments::asymptotic_moment(half, 4).evaluate(q(1, 2)) == q(35, 16));
}

TEST_CASE("asymptotic moments equal MANOVA moments", "[moments][identity][property]") {
  for (const Rational& g : {q(1, 4), q(1, 3), q(1, 2), q(2, 3)}) {
    for (const Rational& p : {q(1, 5), q(1, 2), q(4, 5)}) {
      for (const auto& v : moments::manova_identity_check(MomentContext(g, p), 8)) {
        INFO("gamma=" << numerics::to_string(g) << " p=" << numerics::to_string(p) << " r=" << v.r);
        CHECK(v.equal);
        CHECK(v.asymptotic == v.manova);
      }
    }
  }
}

TEST_CASE("Welch-type bound and ESV/ESK bounds", "[moments][bounds]") {
  // At p = 1 the expected second moment of any unit-norm frame is at least 1 + x.
  for (int n : {6, 10, 14}) {
    const MomentContext ctx(q(1, 2), q(1), n);
    CHECK(moments::ewb_bound(ctx, 2) == 2);
  }
  CHECK(moments::ewb_bound(MomentContext(q(3, 7), q(1), 7), 2) == q(7, 3));

  const auto b = moments::esv_esk_bounds(MomentContext(q(1, 2), q(1, 2)));
  CHECK(b.esv == q(1, 2));
  CHECK(b.esk == q(5, 2));

  // Both bounds are the variance and kurtosis of the frame-normalized MANOVA moments.
  for (const Rational& g : {q(1, 4), q(1, 2), q(3, 5)}) {
    for (const Rational& p : {q(1, 5), q(1, 2), q(3, 4)}) {
      const MomentContext ctx(g, p);
      const Rational m1 = limits::manova_moment_exact(g, p, 1);
      const Rational m2 = limits::manova_moment_exact(g, p, 2);
      const Rational m3 = limits::manova_moment_exact(g, p, 3);
      const Rational m4 = limits::manova_moment_exact(g, p, 4);
      const Rational var = m2 - m1 * m1;
      const Rational kurt = (m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1) / (var * var);
      const auto bounds = moments::esv_esk_bounds(ctx);
      CHECK(bounds.esv == var);
      CHECK(bounds.esk == kurt);
    }
  }
}

TEST_CASE("variance of the second moment decays like 1/n on ETFs", "[moments][montecarlo]") {
  std::vector<double> ns;
  std::vector<double> vars;
  for (int qq : {7, 11, 19, 23, 31}) {
    const Frame f = dss_qr(qq);
    const auto stat = subsets::trace_moment_statistic(f, 2);
    RngStream rng(2024, static_cast<std::uint64_t>(qq));
    const SelectionModel model = SelectionModel::bernoulli(0.5);
    const int trials = 4000;
    std::vector<double> samples;
    samples.reserve(trials);
    for (int t = 0; t < trials; ++t) samples.push_back(stat(subsets::draw(model, f.n(), rng)));
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / trials;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double var = ss / (trials - 1);
    const double exact = numerics::to_double(
        moments::etf_moment_variance(MomentContext(Rational(f.m(), f.n()), q(1, 2), f.n()), 2));
    CHECK_THAT(var, WithinRel(exact, 0.15));
    ns.push_back(f.n());
    vars.push_back(var);
  }
  const auto fit = numerics::loglog_fit(ns, vars);
  CHECK(fit.slope >= -1.3);
  CHECK(fit.slope <= -0.7);
}

TEST_CASE("surd arithmetic", "[moments][surd]") {
  CHECK(rational_sqrt(q(9, 4)) == q(3, 2));
  CHECK_FALSE(rational_sqrt(q(2)).has_value());
  CHECK_FALSE(rational_sqrt(q(-4)).has_value());

  const Surd a(1, 1, 2);
  const Surd b(1, -1, 2);
  const Surd prod = a * b;
  CHECK(prod.u() == -1);
  CHECK(prod.v() == 0);
  CHECK_THAT((a + b).to_double(), WithinAbs(2.0, 1e-15));
  CHECK_THAT(a.to_double(), WithinAbs(1.0 + std::sqrt(2.0), 1e-15));

  const Surd folded(0, 1, 4);
  CHECK(folded.u() == 2);
  CHECK(folded.v() == 0);

  CHECK_THROWS_AS(Surd(0, 1, -2), Error);
  CHECK_THROWS_AS(Surd(0, 1, 2) * Surd(0, 1, 3), Error);
  CHECK_NOTHROW(Surd(0, 1, 2) * Surd::rational(3, 3));
}
