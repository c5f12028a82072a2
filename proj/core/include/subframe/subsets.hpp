#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "subframe/frames.hpp"

namespace subframe {

/// Column selection rule: a uniformly random k-subset, or independent
/// Bernoulli(p) inclusion of every column.
struct SelectionModel {
  enum class Mode { combinatorial, bernoulli };

  Mode mode = Mode::combinatorial;
  int k = 1;
  double p = 0.0;

  static SelectionModel combinatorial(int k);
  static SelectionModel bernoulli(double p);

  /// Throws unless 1 <= k <= n (combinatorial) or 0 <= p <= 1 (bernoulli).
  void validate(int n) const;
};

/// Parses "comb:<k>" or "bern:<p>"; p may be written as a/b.
SelectionModel parse_selection(std::string_view text);
std::string to_string(const SelectionModel& model);

/// Selected column indices, 0-based and strictly increasing.
class SelectionMask {
 public:
  SelectionMask(int n, std::vector<int> indices);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(indices_.size()); }
  [[nodiscard]] bool empty() const noexcept { return indices_.empty(); }
  [[nodiscard]] const std::vector<int>& indices() const noexcept { return indices_; }

  static SelectionMask full(int n);

 private:
  int n_;
  std::vector<int> indices_;
};

struct SubframeMatrices {
  ComplexMatrix gram;     // k x k
  ComplexMatrix hessian;  // m x m
  bool empty = false;
};

namespace subsets {

/// Hard caps on exhaustive enumeration.
inline constexpr int kMaxBernoulliN = 24;
inline constexpr double kMaxCombinations = 1e6;

SelectionMask draw(const SelectionModel& model, int n, RngStream& rng);

/// The m x k matrix of selected columns.
ComplexMatrix columns(const Frame& f, const SelectionMask& s);

SubframeMatrices subframe_gram(const Frame& f, const SelectionMask& s);

/// Binomial coefficient as a double (exact up to 2^53).
double binomial(int n, int k);

/// Throws when exhaustive enumeration of `model` over n columns exceeds the caps.
void check_enumeration_cap(const SelectionModel& model, int n);

/// Visits every mask with its probability weight: p^|S| (1-p)^(n-|S|) in
/// Gray-code order (bernoulli), or 1/C(n,k) in lexicographic order
/// (combinatorial). Enforces the enumeration caps.
void for_each_mask(const SelectionModel& model, int n,
                   const std::function<void(const SelectionMask&, double)>& visit);

using SubsetStatistic = std::function<double(const SelectionMask&)>;

struct ExactResult {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

/// Exact weighted mean and variance of stat(S) over all masks.
ExactResult exact_expectation(int n, const SelectionModel& model, const SubsetStatistic& stat);

/// Statistic (1/n) tr(H_S^r), zero for the empty mask.
SubsetStatistic trace_moment_statistic(const Frame& f, int r);

struct MomentEnumeration {
  std::vector<double> mean;      // index r-1
  std::vector<double> variance;  // index r-1
  std::size_t count = 0;
};

/// Exact mean and variance of (1/n) tr((F P F^H)^r) for r = 1..r_max.
/// Bernoulli mode walks masks in Gray-code order and updates the Hessian by
/// rank-one steps, refreshing it periodically; chunks run in parallel and are
/// reduced in a fixed order.
MomentEnumeration exact_moments(const Frame& f, const SelectionModel& model, int r_max);

nlohmann::json mask_to_json(const SelectionMask& s);
SelectionMask mask_from_json(const nlohmann::json& j, int n);

}  // namespace subsets
}  // namespace subframe
