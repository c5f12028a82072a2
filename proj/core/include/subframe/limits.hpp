#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "subframe/numerics.hpp"

namespace subframe {

enum class LawFamily { mp, manova };

std::string_view to_string(LawFamily family);
LawFamily parse_law_family(std::string_view name);

/// Limiting spectral law of a sub-frame Gram matrix.
///
/// manova(gamma, beta): Wachter law with p = beta * gamma <= 1. Continuous part
/// on [lambda_-, lambda_+], an atom of mass (1 + 1/beta - 1/(beta gamma))^+ at
/// 1/gamma, and for beta > 1 an atom of mass 1 - 1/beta at zero (the Gram of
/// k > m vectors has k - m zero eigenvalues).
///
/// mp(beta): Marchenko-Pastur law with ratio beta, plus the zero atom when beta > 1.
///
/// The CDF of the continuous part is tabulated at construction on a 4096-point
/// grid in the angle variable x = lambda_- + (lambda_+ - lambda_-) sin^2(theta)
/// and interpolated by cubic Hermite segments with exact derivatives.
class LimitLaw {
 public:
  static LimitLaw manova(double gamma, double beta);
  static LimitLaw mp(double beta);

  [[nodiscard]] LawFamily family() const noexcept { return family_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  /// beta * gamma for manova; 0 for mp.
  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double lambda_minus() const noexcept { return lambda_minus_; }
  [[nodiscard]] double lambda_plus() const noexcept { return lambda_plus_; }
  /// 1/gamma for manova; NaN for mp.
  [[nodiscard]] double atom_location() const noexcept { return atom_location_; }
  [[nodiscard]] double atom_mass() const noexcept { return atom_mass_; }
  [[nodiscard]] double zero_atom_mass() const noexcept { return zero_atom_mass_; }

  /// Continuous part of the density; 0 outside (lambda_-, lambda_+).
  [[nodiscard]] double density(double x) const;

  /// Cached CDF including both atoms.
  [[nodiscard]] double cdf(double x) const;
  /// Left limit of the CDF at x.
  [[nodiscard]] double cdf_left(double x) const;
  /// CDF by direct quadrature (verification path).
  [[nodiscard]] double cdf_direct(double x, double abs_tol = 1e-10) const;

  /// Mass of the continuous part from the cached table.
  [[nodiscard]] double continuous_mass() const noexcept { return table_.empty() ? 0.0 : table_.back(); }

  /// Closed-form moment: for manova the frame-normalized Narayana moment
  /// p * int x^r dmu; for mp the plain moment int x^r dmu.
  [[nodiscard]] double moment(int r) const;
  /// Closed-form int x^r dmu.
  [[nodiscard]] double raw_moment(int r) const;
  /// int x^r dmu by quadrature over the continuous part plus atoms.
  [[nodiscard]] double quadrature_moment(int r, double abs_tol = 1e-10) const;

  /// int g dmu over the continuous part only.
  [[nodiscard]] double integrate_continuous(const std::function<double(double)>& g,
                                            double abs_tol) const;

  /// Density times dx/dtheta in the angle variable.
  [[nodiscard]] double angular_weight(double theta) const;
  [[nodiscard]] double x_of_theta(double theta) const;

  [[nodiscard]] const std::vector<double>& cdf_table() const noexcept { return table_; }

 private:
  LimitLaw() = default;
  void build_table();
  [[nodiscard]] double continuous_cdf(double x) const;

  LawFamily family_ = LawFamily::manova;
  double gamma_ = 0.0;
  double beta_ = 0.0;
  double p_ = 0.0;
  double lambda_minus_ = 0.0;
  double lambda_plus_ = 0.0;
  double atom_location_ = 0.0;
  double atom_mass_ = 0.0;
  double zero_atom_mass_ = 0.0;
  std::vector<double> table_;  // cumulative continuous mass at grid angles
};

namespace limits {

inline constexpr int kCdfGridPoints = 4096;

/// N(j, i) = (1/j) C(j, i) C(j, i-1).
BigInt narayana(int j, int i);
BigInt catalan(int j);

struct NarayanaTable {
  int max_order = 0;
  std::vector<std::vector<Rational>> entries;  // entries[j][i], 1 <= i <= j
  [[nodiscard]] const Rational& at(int j, int i) const {
    return entries[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
};
NarayanaTable narayana_table(int max_order);

/// Frame-normalized MANOVA moment m_r(gamma, p) with x = 1/gamma - 1:
///   p (x+1)^(r-1) - sum_{j=0}^{r-2} (x+1)^(r-2-j) sum_{i=1}^{j+1} N(j+1,i) (xp)^i (1-p)^(2+j-i).
/// Every (1-p) exponent is nonnegative, so p = 1 is exact.
Rational manova_moment_exact(const Rational& gamma, const Rational& p, int r);
double manova_moment(double gamma, double p, int r);

/// int x^r dmu for Marchenko-Pastur: sum_i N(r,i) beta^(i-1).
Rational mp_moment_exact(const Rational& beta, int r);
double mp_moment(double beta, int r);

enum class FunctionalKind { generic, mse, shannon };

struct LawFunctional {
  double value = 0.0;
  /// +1 or -1 when the integral diverges; value then holds +-infinity.
  int infinite = 0;
  double log_base = M_E;
};

/// Psi(mu) for the limiting law.
///  mse: (int x dmu)(int x^-1 dmu), diverging when lambda_- = 0 (the density
///       behaves like x^(-1/2) there) or when a zero atom exists.
///  shannon: log of geometric-to-arithmetic mean over the nonzero spectrum;
///       -infinity for beta < 1, where the m x m Hessian is singular.
///  generic: int g dmu including atoms.
LawFunctional functional_integral(const LimitLaw& law, FunctionalKind kind, double abs_tol,
                                  const std::function<double(double)>& g = {},
                                  double log_base = M_E);

/// CSV: commented parameter header, then x,density,cdf on `points` samples.
void write_law_csv(const LimitLaw& law, const std::filesystem::path& path, int points = 512);

}  // namespace limits
}  // namespace subframe
