#pragma once

#include <map>
#include <optional>
#include <vector>

#include "subframe/numerics.hpp"

namespace subframe {

/// Exact parameters for the moment formulas; x = 1/gamma - 1.
struct MomentContext {
  Rational gamma;
  Rational p;
  Rational x;
  std::optional<int> n;

  /// Requires 0 < gamma < 1 and 0 <= p <= 1. When n is given, gamma * n must be an integer.
  MomentContext(Rational gamma, Rational p, std::optional<int> n = std::nullopt);
};

/// u + v sqrt(d) with rational u, v, d. When d is a rational square the value
/// is folded into u and v stays zero.
class Surd {
 public:
  Surd() = default;
  Surd(Rational u, Rational v, Rational d);
  static Surd rational(Rational u, Rational d) { return Surd(std::move(u), 0, std::move(d)); }

  [[nodiscard]] const Rational& u() const noexcept { return u_; }
  [[nodiscard]] const Rational& v() const noexcept { return v_; }
  [[nodiscard]] const Rational& d() const noexcept { return d_; }
  [[nodiscard]] bool is_zero() const { return u_ == 0 && v_ == 0; }
  [[nodiscard]] double to_double() const;

  Surd& operator+=(const Surd& o);
  friend Surd operator+(Surd a, const Surd& b) { return a += b; }
  friend Surd operator*(const Surd& a, const Surd& b);
  friend Surd operator*(const Surd& a, const Rational& c);
  friend bool operator==(const Surd& a, const Surd& b) {
    return a.u_ == b.u_ && a.v_ == b.v_ && a.d_ == b.d_;
  }

 private:
  Rational u_ = 0;
  Rational v_ = 0;
  Rational d_ = 0;
};

/// Exact square root when q is the square of a rational.
std::optional<Rational> rational_sqrt(const Rational& q);

struct ASequence {
  Rational gamma;
  std::vector<Surd> values;  // values[s-1] = A_s
  [[nodiscard]] const Surd& at(int s) const;
  [[nodiscard]] int max_s() const noexcept { return static_cast<int>(values.size()); }
};

struct Partition {
  int r = 0;
  int t = 0;
  std::vector<int> block_of;  // restricted growth, 0-based blocks
};

struct CycleProfile {
  bool is_noncrossing = false;
  std::vector<int> cycle_lengths;  // sorted descending; empty when crossing
};

/// Polynomial in p with coefficients in Q(sqrt(x)); coeffs[i] multiplies p^i.
struct SurdPolynomial {
  std::vector<Surd> coeffs;
  [[nodiscard]] Surd evaluate(const Rational& p) const;
};

/// Polynomial in p with rational coefficients; coeffs[i] multiplies p^i.
struct RationalPolynomial {
  std::vector<Rational> coeffs;
  [[nodiscard]] Rational evaluate(const Rational& p) const;
};

struct IdentityVerdict {
  int r = 0;
  Rational asymptotic;
  Rational manova;
  bool equal = false;
};

struct EsvEskBounds {
  Rational esv;
  Rational esk;
};

namespace moments {

inline constexpr int kDefaultPartitionCap = 10;
inline constexpr int kHardPartitionCap = 12;

/// m_r^MANOVA(gamma, p) + Delta(r, n) for r = 1..4; Delta is nonzero only at
/// r = 4, where it equals p^2 (1-p)^2 x^2 / (n-1).
Rational etf_expected_moment(const MomentContext& ctx, int r);

/// Variance of the r-th moment, r = 1, 2. V1 = (p - p^2)/n holds for any
/// unit-norm frame; V2 = (1/n)[p + t2 p^2 + t3 p^3 + t4 p^4] holds for ETFs.
Rational etf_moment_variance(const MomentContext& ctx, int r);

/// A_1 = (2 - 1/gamma) / (2 sqrt(1/gamma - 1)), A_2 = 1,
/// A_{s+1} = -sum_{i=1}^{s} A_i A_{s+1-i}: the free cumulants of the centred
/// two-point Gram spectrum, so at gamma = 1/2 the even terms alternate in sign.
ASequence a_sequence(const Rational& gamma, int max_s);

std::vector<Partition> enumerate_partitions(int r, int t, int cap = kDefaultPartitionCap);

CycleProfile classify(const Partition& pi);

Surd partition_value(const CycleProfile& profile, const ASequence& a);

/// Count of non-crossing partitions of [r] into t blocks per cycle-length
/// multiset; crossing partitions contribute nothing. Cached per r.
using Census = std::map<std::pair<int, std::vector<int>>, BigInt>;
const Census& partition_census(int r, int cap = kDefaultPartitionCap);

/// sum_t (sum_{pi in Pi(r,t)} V*(pi)) p^t.
SurdPolynomial central_moment(const MomentContext& ctx, int r, int cap = kDefaultPartitionCap);

/// (1/(2 gamma))^r p + sum_{j=1}^{r} C(r,j) x^(j/2) (1/(2 gamma))^(r-j) m_j^central.
/// Throws if an irrational coefficient survives.
RationalPolynomial asymptotic_moment(const MomentContext& ctx, int r,
                                     int cap = kDefaultPartitionCap);

std::vector<IdentityVerdict> manova_identity_check(const MomentContext& ctx, int r_max,
                                                   int cap = kDefaultPartitionCap);

/// Lower bound on the expected r-th moment of any unit-norm frame, r = 2..4.
Rational ewb_bound(const MomentContext& ctx, int r);

/// esv >= p + (x-1) p^2; esk bound is the kurtosis of the MANOVA moments,
/// [p + (6x-4)p^2 + (6x^2-16x+6)p^3 + (x^3-7x^2+11x-3)p^4] / (p + (x-1)p^2)^2.
EsvEskBounds esv_esk_bounds(const MomentContext& ctx);

}  // namespace moments
}  // namespace subframe
