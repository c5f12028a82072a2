#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "subframe/harness.hpp"
#include "subframe/limits.hpp"
#include "subframe/spectra.hpp"

using namespace subframe;
using namespace subframe::testing;

namespace {

ConvergenceConfig small_ladder() {
  ConvergenceConfig cfg;
  cfg.family = FrameFamily::dss;
  cfg.sizes = {19, 9, 31, 43, 59};
  cfg.gamma = 0.5;
  cfg.beta = 0.8;
  cfg.metrics = {ConvergenceMetric::ks, ConvergenceMetric::mse, ConvergenceMetric::moment};
  cfg.moment_r = 3;  // r = 2 is constant over equal-size subsets of an ETF
  cfg.trials = 12;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("metric names", "[harness]") {
  for (auto m : {ConvergenceMetric::ks, ConvergenceMetric::mse, ConvergenceMetric::shannon, ConvergenceMetric::moment}) {
    CHECK(parse_metric(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_metric("entropy"), Error);
}

TEST_CASE("MANOVA ensemble sample", "[harness][ensemble]") {
  RngStream rng(4, 0);
  const auto eig = harness::manova_ensemble_sample(200, 100, 80, rng);
  REQUIRE(eig.size() == 80);
  CHECK(std::is_sorted(eig.begin(), eig.end()));
  CHECK(eig.front() >= 0.0);
  CHECK(eig.back() <= 2.0 + 1e-9);
  const double mean = std::accumulate(eig.begin(), eig.end(), 0.0) / 80.0;
  CHECK_THAT(mean, WithinAbs(1.0, 0.1));
  const LimitLaw law = LimitLaw::manova(0.5, 0.8);
  CHECK(spectra::ks_distance(Esd(eig, Side::gram), law) < 0.15);

  RngStream again(4, 0);
  CHECK(harness::manova_ensemble_sample(200, 100, 80, again) == eig);
  CHECK_THROWS_AS(harness::manova_ensemble_sample(10, 10, 3, rng), Error);
  CHECK_THROWS_AS(harness::manova_ensemble_sample(10, 5, 0, rng), Error);
}

TEST_CASE("convergence run: records, fits and determinism", "[harness][convergence]") {
  const ConvergenceConfig cfg = small_ladder();
  const ExperimentReport a = harness::run_convergence(cfg);
  const ExperimentReport b = harness::run_convergence(cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.kind == "convergence");

  // q = 9 is not prime, so that rung is skipped and reported.
  REQUIRE_FALSE(a.skipped.empty());
  CHECK(a.skipped.front().find("size 9") == 0);
  CHECK(a.records.size() == 4 * 3);
  CHECK(a.reference_records.size() == 4 * 3);

  for (const auto& r : a.records) {
    CHECK(r.gamma_target == 0.5);
    CHECK(r.gamma_realized == static_cast<double>(r.m) / r.n);
    CHECK(r.beta_realized == static_cast<double>(r.k) / r.m);
    CHECK(r.trials == cfg.trials);
    CHECK(r.delta_mean >= 0.0);
  }
  CHECK(a.fits.count("ks/frame/mean") == 1);
  CHECK(a.fits.count("mse/reference/rms") == 1);
  CHECK(a.two_factor_fits.count("moment/frame/mean") == 1);

  const auto j = a.to_json();
  CHECK(j.contains("records"));
  CHECK(j.contains("verdicts"));
  CHECK(j["all_passed"].get<bool>() == a.all_passed());
}

TEST_CASE("convergence run: seeds matter and configuration is validated", "[harness][convergence]") {
  ConvergenceConfig cfg = small_ladder();
  cfg.sizes = {19, 31};
  cfg.metrics = {ConvergenceMetric::ks};
  const auto a = harness::run_convergence(cfg);
  cfg.seed = 12;
  const auto b = harness::run_convergence(cfg);
  CHECK(a.records.front().delta_mean != b.records.front().delta_mean);

  ConvergenceConfig bad = small_ladder();
  bad.trials = 1;
  CHECK_THROWS_AS(harness::run_convergence(bad), Error);
  bad = small_ladder();
  bad.sizes.clear();
  CHECK_THROWS_AS(harness::run_convergence(bad), Error);
}

TEST_CASE("small frame zoo", "[harness]") {
  const auto zoo = harness::small_frame_zoo(5);
  CHECK(zoo.size() == 23);
  for (const auto& f : zoo) CHECK(f.n() <= 10);
  const auto again = harness::small_frame_zoo(5);
  for (std::size_t i = 0; i < zoo.size(); ++i) CHECK(zoo[i].matrix() == again[i].matrix());
}

TEST_CASE("verification suite passes every scope", "[harness][verify]") {
  const ExperimentReport report = harness::run_verification_suite(harness::kVerificationScopes, 7);
  CHECK(report.kind == "verification");
  REQUIRE_FALSE(report.verdicts.empty());
  for (const auto& v : report.verdicts) {
    INFO(v.name << " measured=" << v.measured << " tol=" << v.tolerance << " " << v.detail);
    CHECK(v.pass);
  }
  CHECK(report.all_passed());
  for (const auto& scope : harness::kVerificationScopes) {
    const bool present = std::any_of(report.verdicts.begin(), report.verdicts.end(),
                                     [&](const Verdict& v) { return v.name.rfind(scope + "/", 0) == 0; });
    INFO(scope);
    CHECK(present);
  }
  CHECK_THROWS_AS(harness::run_verification_suite({"moments", "nope"}, 7), Error);
}

TEST_CASE("verdict and record JSON", "[harness]") {
  const Verdict v{"x/y", true, 0.5, 1.0, "note"};
  const auto j = harness::to_json(v);
  CHECK(j["name"] == "x/y");
  CHECK(j["pass"] == true);
  ExperimentReport r;
  r.verdicts.push_back({"a", true, 0, 0, ""});
  CHECK(r.all_passed());
  r.verdicts.push_back({"b", false, 0, 0, ""});
  CHECK_FALSE(r.all_passed());
}
