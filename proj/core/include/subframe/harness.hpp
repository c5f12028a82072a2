#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subframe/coding.hpp"
#include "subframe/frames.hpp"
#include "subframe/moments.hpp"

namespace subframe {

enum class ConvergenceMetric { ks, mse, shannon, moment };

std::string_view to_string(ConvergenceMetric metric);
ConvergenceMetric parse_metric(std::string_view name);

struct ConvergenceConfig {
  FrameFamily family = FrameFamily::dss;
  /// Ladder parameter per size: q for dss and paley families, v for
  /// steiner_pairs, n otherwise (with m = round(gamma n)).
  std::vector<int> sizes;
  double gamma = 0.5;
  double beta = 0.8;
  std::vector<ConvergenceMetric> metrics{ConvergenceMetric::ks};
  int moment_r = 2;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  bool bernoulli = false;
  bool reference = true;
};

struct ConvergenceRecord {
  std::string family;
  int n = 0;
  int m = 0;
  int k = 0;
  double gamma_target = 0.0;
  double beta_target = 0.0;
  double gamma_realized = 0.0;
  double beta_realized = 0.0;
  std::string metric;
  double delta_mean = 0.0;
  double delta_var = 0.0;
  double delta_rms = 0.0;
  std::size_t trials = 0;
  std::size_t infinite_count = 0;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::vector<ConvergenceRecord> records;
  std::vector<ConvergenceRecord> reference_records;
  std::map<std::string, numerics::FitResult> fits;
  std::map<std::string, numerics::LogLogLogFit> two_factor_fits;
  std::vector<Verdict> verdicts;
  std::vector<std::string> skipped;

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

namespace harness {

/// Eigenvalues of (n/m) (AA^H + BB^H)^(-1/2) BB^H (AA^H + BB^H)^(-1/2) with
/// A (k x (n-m)) and B (k x m) i.i.d. complex Gaussian.
std::vector<double> manova_ensemble_sample(int n, int m, int k, RngStream& rng);

/// Per size: draws subsets of the family's frame and matched MANOVA-ensemble
/// samples, measures the distance of each spectrum to the MANOVA law at the
/// realized (m/n, k/m), and fits log-log slopes over n. Trial t at size index
/// i uses stream (seed, combine_stream(i, t)); the ensemble uses
/// (seed, combine_stream(combine_stream(i, t), 1)).
ExperimentReport run_convergence(const ConvergenceConfig& cfg);

inline const std::vector<std::string> kVerificationScopes{
    "moments",         "variances",        "ewb",       "esv_esk", "monotonicity_shannon",
    "monotonicity_mse", "lemma_avg",       "identity_check"};

/// Desk-scale checks of the exact moment, variance and bound identities, the
/// monotonicity of subset-averaged functionals and the subset-average lemma.
ExperimentReport run_verification_suite(const std::vector<std::string>& scopes, std::uint64_t seed);

/// Frames used by the monotonicity and lemma checks: 15 deterministic and 8
/// seeded random frames, all with n <= 10.
std::vector<Frame> small_frame_zoo(std::uint64_t seed);

nlohmann::json to_json(const ConvergenceRecord& r);
nlohmann::json to_json(const numerics::FitResult& f);
nlohmann::json to_json(const Verdict& v);

}  // namespace harness
}  // namespace subframe
