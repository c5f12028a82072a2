#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "subframe/limits.hpp"
#include "subframe/subsets.hpp"

namespace subframe {

enum class Side { gram, hessian, automatic };

std::string_view to_string(Side side);

/// Ascending eigenvalues of a sub-frame Gram or Hessian.
class Esd {
 public:
  /// Sorts, clips values in [-1e-9, 0) to zero and rejects anything below -1e-9
  /// or non-finite.
  Esd(std::vector<double> eigenvalues, Side ambient);

  [[nodiscard]] const std::vector<double>& eigenvalues() const noexcept { return values_; }
  [[nodiscard]] Side ambient() const noexcept { return ambient_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
  Side ambient_;
};

struct SpectralSummary {
  std::array<double, 6> m{};  // m[r-1] = (1/normalizer) sum lambda^r
  double esv = 0.0;
  std::optional<double> esk;  // empty when esv <= 1e-12
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

enum class FunctionalKind { mse, shannon, rip, cond, strip_indicator };

std::string_view to_string(FunctionalKind kind);
FunctionalKind parse_functional(std::string_view name);

struct FunctionalParams {
  double delta = 0.1;     // strip_indicator threshold on the RIP statistic
  double log_base = M_E;  // shannon, and the log in L_MSE
};

struct FunctionalResult {
  FunctionalKind kind = FunctionalKind::mse;
  double value = 0.0;
  /// +1 / -1 when the value is +infinity / -infinity.
  int infinite = 0;
  FunctionalParams params;
};

struct SubsetAverage {
  double mean = 0.0;
  /// 1.96 standard errors (Monte-Carlo); 0 for exact averages.
  double half_width = 0.0;
  /// Mean over subsets with a finite value.
  double finite_mean = 0.0;
  std::size_t samples = 0;
  std::size_t infinite_count = 0;
  std::size_t empty_count = 0;
  bool exact = false;
};

namespace spectra {

/// Singular threshold: eigenvalues <= kSingularRel * lambda_max count as zero.
inline constexpr double kSingularRel = 1e-12;

Esd esd_of(const Frame& f, const SelectionMask& s, Side side = Side::automatic);
Esd esd_from_matrix(const ComplexMatrix& h, Side side);

double moment_of(const Esd& e, int r, double normalizer);

SpectralSummary summary(const Esd& e, double normalizer);

/// Functionals of an explicit eigenvalue list (used for both frames and the
/// MANOVA ensemble).
FunctionalResult psi_mse(std::span<const double> eigenvalues);
FunctionalResult psi_shannon(std::span<const double> hessian_eigenvalues, double log_base = M_E);

FunctionalResult functional(const Frame& f, const SelectionMask& s, FunctionalKind kind,
                            const FunctionalParams& params = {});

/// The per-subset quantity that subset_average averages: log(Psi_MSE) for mse,
/// the indicator for strip, and the functional itself otherwise.
FunctionalResult averaged_quantity(const Frame& f, const SelectionMask& s, FunctionalKind kind,
                                   const FunctionalParams& params);

/// trials == 0 requests exact enumeration; otherwise trials >= 2 Monte-Carlo
/// draws on streams rng.derive(trial).
SubsetAverage subset_average(const Frame& f, const SelectionModel& model, FunctionalKind kind,
                             const FunctionalParams& params, std::size_t trials,
                             const RngStream* rng);

double ks_distance(const Esd& e, const LimitLaw& law);
double ks_distance(const Esd& a, const Esd& b);

void write_esd_csv(const Esd& e, const std::filesystem::path& path);
Esd read_esd_csv(const std::filesystem::path& path, Side side = Side::gram);
nlohmann::json summary_to_json(const SpectralSummary& s, double normalizer);

}  // namespace spectra
}  // namespace subframe
