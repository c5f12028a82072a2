#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subframe/numerics.hpp"
#include "subframe/rng.hpp"

namespace subframe {

enum class FrameFamily {
  lpf,
  dss,
  paley_real,
  paley_complex,
  steiner_pairs,
  spikes_fourier,
  spikes_hadamard,
  union_bases,
  iid_gaussian,
  haar,
  rand_dft,
  rand_dct,
  custom,
};

std::string_view to_string(FrameFamily family);
FrameFamily parse_family(std::string_view name);
bool is_random_family(FrameFamily family);

/// Construction parameters. Each family reads only the fields it needs:
///   lpf, iid_gaussian, haar, rand_dft, rand_dct: m, n
///   dss: mode "qr" with q, or mode "explicit" with n (modulus) and set
///   paley_real, paley_complex: q
///   steiner_pairs: v
///   spikes_fourier, spikes_hadamard: m
///   union_bases: m plus either copies (identity bases) or bases
struct FrameParams {
  std::optional<int> m;
  std::optional<int> n;
  std::optional<int> q;
  std::optional<int> v;
  std::optional<int> copies;
  std::vector<int> set;
  std::string mode;
  std::vector<std::string> bases;
  bool real = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream;
};

/// An m x n matrix with unit-norm columns, n >= m >= 1. Immutable.
class Frame {
 public:
  explicit Frame(ComplexMatrix matrix, FrameFamily family = FrameFamily::custom,
                 FrameParams params = {}, double unit_norm_tol = 1e-12);

  [[nodiscard]] int m() const noexcept { return static_cast<int>(matrix_.rows()); }
  [[nodiscard]] int n() const noexcept { return static_cast<int>(matrix_.cols()); }
  [[nodiscard]] double gamma() const noexcept { return static_cast<double>(m()) / n(); }
  [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] FrameFamily family() const noexcept { return family_; }
  [[nodiscard]] const FrameParams& params() const noexcept { return params_; }

 private:
  ComplexMatrix matrix_;
  FrameFamily family_;
  FrameParams params_;
};

struct FrameDiagnostics {
  double coherence = 0.0;
  double welch_max_bound = 0.0;
  double welch_ms_lhs = 0.0;
  double welch_ms_rhs = 0.0;
  double tightness_residual = 0.0;
  double equiangular_residual = 0.0;
  bool is_tight = false;
  bool is_etf = false;
};

struct DifferenceSet {
  int modulus = 0;
  std::vector<int> elements;
  int lambda = 0;
};

struct DifferenceSetCheck {
  bool is_difference_set = false;
  /// Common cover multiplicity when valid; otherwise the multiplicity of residue 1.
  int lambda = 0;
};

namespace frames {

Frame build(FrameFamily family, const FrameParams& params, RngStream* rng = nullptr);

FrameDiagnostics diagnostics(const Frame& frame);

DifferenceSetCheck validate_difference_set(const DifferenceSet& d);

bool is_prime(int q);

/// Nonzero quadratic residues mod a prime q, sorted.
std::vector<int> quadratic_residues(int q);

/// Legendre symbol (a/q) for prime q: 0, +1 or -1.
int legendre(long long a, int q);

/// Factors a PSD Gram matrix G = F^H F keeping eigenvalues above rank_tol * max.
Frame from_gram(const ComplexMatrix& g, FrameFamily family = FrameFamily::custom,
                FrameParams params = {}, double rank_tol = 1e-9);

/// ETF whose Gram is I + nu * S for a Seidel (or generalized Seidel) matrix S.
Frame from_seidel(const ComplexMatrix& seidel, double nu);

/// 6x6 Seidel matrix of the pentagon with an added vertex at infinity.
ComplexMatrix pentagon_seidel();

/// The 3x6 real ETF with Gram I + S/sqrt(5) built from pentagon_seidel().
Frame pentagon_etf();

/// Three unit vectors in R^2 at 120 degrees.
Frame mercedes_benz();

/// First m rows of an n x n Haar unitary (orthogonal when real), before any
/// column normalization.
ComplexMatrix haar_rows(int m, int n, RngStream& rng, bool real = false);

/// Unitary n x n DFT with entries exp(-2 pi j r c / n) / sqrt(n).
ComplexMatrix unitary_dft(int n);

/// Sylvester Hadamard matrix of order n (a power of two), entries +-1.
ComplexMatrix sylvester_hadamard(int n);

}  // namespace frames
}  // namespace subframe
