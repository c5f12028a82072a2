#pragma once

// Numerical kernel shared by every other module: Hermitian eigensolver,
// edge-singular quadrature, exact rationals, compensated summation and
// log-log regression.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace subframe {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised for precondition violations and invalid inputs across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact rational number; always normalized to lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

namespace numerics {

// ---------------------------------------------------------------------------
// Matrices

/// Throws unless every entry of `m` is finite.
void require_finite(const ComplexMatrix& m, std::string_view what = "matrix");

double max_abs(const ComplexMatrix& m);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column j pairs with values[j]
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (g + g^H)/2 first; asymmetry above 1e-12 * max|g| is rejected.
HermitianEigen herm_eig(const ComplexMatrix& g);

/// Eigenvalues only, ascending. Same preconditions as herm_eig.
std::vector<double> herm_eigvals(const ComplexMatrix& g);

/// Gram matrix F^H F.
ComplexMatrix gram(const ComplexMatrix& f);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureOptions {
  std::size_t initial_panels = std::size_t{1} << 14;
  std::size_t max_panels = std::size_t{1} << 22;
};

/// Composite Simpson on [a, b] with panel doubling until two successive
/// estimates agree within abs_tol. Non-finite endpoint values are replaced by
/// the value at a point nudged 1e-9*(b-a) inward.
double simpson(const std::function<double(double)>& g, double a, double b, double abs_tol,
               const QuadratureOptions& opts = {});

/// Integrates f over [lo, hi] after the substitution x = lo + (hi-lo) sin^2(theta),
/// which removes inverse-square-root singularities at both edges.
double integrate_edge_singular(const std::function<double(double)>& f, double lo, double hi,
                               double abs_tol, const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Summation

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  void merge(const CompensatedSum& other) noexcept;
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Regression

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// OLS of ln(y) on ln(x) with intercept.
FitResult loglog_fit(std::span<const double> xs, std::span<const double> ys);

/// ln(y) = intercept + b1 ln(n) + b2 ln(ln(n)).
struct LogLogLogFit {
  double intercept = 0.0;
  double coef_log = 0.0;
  double coef_loglog = 0.0;
  double stderr_log = 0.0;
  double stderr_loglog = 0.0;
  double r_squared = 0.0;
};
LogLogLogFit loglog_loglog_fit(std::span<const double> ns, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Rationals

/// Parses "a/b", "a" or a finite decimal such as "0.25".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

// ---------------------------------------------------------------------------
// Parallel helpers

/// Runs body(chunk) for chunk in [0, chunks) on a small thread pool. Results
/// must be written to per-chunk slots so that reduction order stays fixed.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace numerics
}  // namespace subframe
