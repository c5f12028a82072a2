#include <benchmark/benchmark.h>

#include "subframe/frames.hpp"
#include "subframe/limits.hpp"
#include "subframe/moments.hpp"
#include "subframe/numerics.hpp"
#include "subframe/spectra.hpp"
#include "subframe/subsets.hpp"

using namespace subframe;

namespace {

Frame dss(int q) {
  FrameParams p;
  p.mode = "qr";
  p.q = q;
  return frames::build(FrameFamily::dss, p);
}

void BM_HermitianEigvals(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(1, 0);
  ComplexMatrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  const ComplexMatrix h = (a + a.adjoint()) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(numerics::herm_eigvals(h));
  state.SetComplexityN(n);
}
BENCHMARK(BM_HermitianEigvals)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNCubed);

void BM_ExactBernoulliMoments(benchmark::State& state) {
  const Frame f = dss(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(subsets::exact_moments(f, SelectionModel::bernoulli(0.5), 4));
  }
}
BENCHMARK(BM_ExactBernoulliMoments)->Arg(7)->Arg(11)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_AsymptoticMoment(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const MomentContext ctx(Rational(1, 3), Rational(1, 2));
  moments::partition_census(r);  // warm the census cache
  for (auto _ : state) benchmark::DoNotOptimize(moments::asymptotic_moment(ctx, r));
}
BENCHMARK(BM_AsymptoticMoment)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_LawConstruction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(LimitLaw::manova(0.3, 0.7));
}
BENCHMARK(BM_LawConstruction)->Unit(benchmark::kMicrosecond);

void BM_KsDistance(benchmark::State& state) {
  const Frame f = dss(static_cast<int>(state.range(0)));
  const int k = static_cast<int>(0.8 * f.m());
  RngStream rng(3, 0);
  const SelectionMask s = subsets::draw(SelectionModel::combinatorial(k), f.n(), rng);
  const Esd e = spectra::esd_of(f, s, Side::gram);
  const LimitLaw law = LimitLaw::manova(f.gamma(), static_cast<double>(k) / f.m());
  for (auto _ : state) benchmark::DoNotOptimize(spectra::ks_distance(e, law));
}
BENCHMARK(BM_KsDistance)->Arg(103)->Arg(499)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
