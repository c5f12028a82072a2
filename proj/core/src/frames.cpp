#include "subframe/frames.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace subframe {

namespace {

struct FamilyName {
  FrameFamily family;
  std::string_view name;
};

constexpr std::array<FamilyName, 13> kFamilyNames{{
    {FrameFamily::lpf, "lpf"},
    {FrameFamily::dss, "dss"},
    {FrameFamily::paley_real, "paley_real"},
    {FrameFamily::paley_complex, "paley_complex"},
    {FrameFamily::steiner_pairs, "steiner_pairs"},
    {FrameFamily::spikes_fourier, "spikes_fourier"},
    {FrameFamily::spikes_hadamard, "spikes_hadamard"},
    {FrameFamily::union_bases, "union_bases"},
    {FrameFamily::iid_gaussian, "iid_gaussian"},
    {FrameFamily::haar, "haar"},
    {FrameFamily::rand_dft, "rand_dft"},
    {FrameFamily::rand_dct, "rand_dct"},
    {FrameFamily::custom, "custom"},
}};

}  // namespace

std::string_view to_string(FrameFamily family) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == family) return entry.name;
  }
  return "custom";
}

FrameFamily parse_family(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  throw Error("unknown frame family '" + std::string(name) + "'");
}

bool is_random_family(FrameFamily family) {
  switch (family) {
    case FrameFamily::iid_gaussian:
    case FrameFamily::haar:
    case FrameFamily::rand_dft:
    case FrameFamily::rand_dct:
      return true;
    default:
      return false;
  }
}

Frame::Frame(ComplexMatrix matrix, FrameFamily family, FrameParams params, double unit_norm_tol)
    : matrix_(std::move(matrix)), family_(family), params_(std::move(params)) {
  if (matrix_.rows() < 1) throw Error("frame: dimension m must be at least 1");
  if (matrix_.cols() < matrix_.rows()) {
    throw Error("frame: need n >= m, got m=" + std::to_string(matrix_.rows()) +
                " n=" + std::to_string(matrix_.cols()));
  }
  numerics::require_finite(matrix_, "frame");
  for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
    const double norm = matrix_.col(j).norm();
    if (std::abs(norm - 1.0) > unit_norm_tol) {
      std::ostringstream os;
      os << "frame: column " << j << " has norm " << norm << " (tolerance " << unit_norm_tol
         << ")";
      throw Error(os.str());
    }
  }
}

namespace frames {

bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= q; ++d) {
    if (q % d == 0) return false;
  }
  return true;
}

std::vector<int> quadratic_residues(int q) {
  if (!is_prime(q)) throw Error("quadratic_residues: " + std::to_string(q) + " is not prime");
  std::vector<int> out;
  for (long long i = 1; i < q; ++i) out.push_back(static_cast<int>((i * i) % q));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int legendre(long long a, int q) {
  a %= q;
  if (a < 0) a += q;
  if (a == 0) return 0;
  // Euler's criterion.
  long long result = 1;
  long long base = a;
  long long e = (q - 1) / 2;
  while (e > 0) {
    if (e & 1) result = result * base % q;
    base = base * base % q;
    e >>= 1;
  }
  return result == 1 ? 1 : -1;
}

DifferenceSetCheck validate_difference_set(const DifferenceSet& d) {
  if (d.modulus < 1) throw Error("difference set: modulus must be positive");
  std::vector<int> elems;
  elems.reserve(d.elements.size());
  for (const int e : d.elements) elems.push_back(((e % d.modulus) + d.modulus) % d.modulus);
  std::vector<int> sorted = elems;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("difference set: elements must be distinct residues");
  }
  std::vector<int> cover(static_cast<std::size_t>(d.modulus), 0);
  for (const int a : elems) {
    for (const int b : elems) {
      if (a != b) ++cover[static_cast<std::size_t>(((a - b) % d.modulus + d.modulus) % d.modulus)];
    }
  }
  DifferenceSetCheck out;
  if (d.modulus == 1) {
    out.is_difference_set = true;
    return out;
  }
  out.lambda = cover[1];
  out.is_difference_set =
      std::all_of(cover.begin() + 1, cover.end(), [&](int c) { return c == cover[1]; });
  return out;
}

ComplexMatrix unitary_dft(int n) {
  ComplexMatrix w(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const long long e = (static_cast<long long>(r) * c) % n;
      w(r, c) = std::polar(scale, -2.0 * M_PI * static_cast<double>(e) / n);
    }
  }
  return w;
}

ComplexMatrix sylvester_hadamard(int n) {
  if (n < 1 || (n & (n - 1)) != 0) {
    throw Error("sylvester_hadamard: order " + std::to_string(n) + " is not a power of two");
  }
  ComplexMatrix h = ComplexMatrix::Ones(1, 1);
  while (h.rows() < n) {
    const Eigen::Index s = h.rows();
    ComplexMatrix next(2 * s, 2 * s);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return h;
}

Frame from_gram(const ComplexMatrix& g, FrameFamily family, FrameParams params, double rank_tol) {
  const Eigen::Index n = g.rows();
  if (n == 0 || g.cols() != n) throw Error("from_gram: Gram matrix must be square and nonempty");
  const bool real = g.imag().cwiseAbs().maxCoeff() == 0.0;
  std::vector<double> values;
  ComplexMatrix vectors;
  if (real) {
    const Eigen::MatrixXd gr = (g.real() + g.real().transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gr);
    if (solver.info() != Eigen::Success) throw Error("from_gram: eigensolver failed");
    values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    vectors = solver.eigenvectors().cast<Complex>();
  } else {
    auto eig = numerics::herm_eig(g);
    values = std::move(eig.values);
    vectors = std::move(eig.vectors);
  }
  const double top = values.back();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (values[static_cast<std::size_t>(i)] > rank_tol * top) keep.push_back(i);
  }
  ComplexMatrix f(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double s = std::sqrt(values[static_cast<std::size_t>(keep[r])]);
    f.row(static_cast<Eigen::Index>(r)) = s * vectors.col(keep[r]).adjoint();
  }
  if (real) f = f.real().cast<Complex>();
  for (Eigen::Index j = 0; j < n; ++j) f.col(j) /= f.col(j).norm();
  return Frame(std::move(f), family, std::move(params));
}

Frame from_seidel(const ComplexMatrix& seidel, double nu) {
  const Eigen::Index n = seidel.rows();
  ComplexMatrix g = ComplexMatrix::Identity(n, n) + nu * seidel;
  return from_gram(g);
}

ComplexMatrix pentagon_seidel() {
  // Rows/columns: infinity, then the 5-cycle vertices 0..4. Adjacent cycle
  // vertices get -1, every other off-diagonal pair +1.
  ComplexMatrix s = ComplexMatrix::Ones(6, 6);
  for (int i = 0; i < 6; ++i) s(i, i) = 0.0;
  for (int v = 0; v < 5; ++v) {
    const int w = (v + 1) % 5;
    s(v + 1, w + 1) = -1.0;
    s(w + 1, v + 1) = -1.0;
  }
  return s;
}

Frame pentagon_etf() { return from_seidel(pentagon_seidel(), 1.0 / std::sqrt(5.0)); }

Frame mercedes_benz() {
  ComplexMatrix f(2, 3);
  for (int i = 0; i < 3; ++i) {
    const double angle = M_PI / 2.0 + 2.0 * M_PI * i / 3.0;
    f(0, i) = std::cos(angle);
    f(1, i) = std::sin(angle);
  }
  return Frame(std::move(f));
}

ComplexMatrix haar_rows(int m, int n, RngStream& rng, bool real) {
  if (m < 1 || n < m) throw Error("haar: need 1 <= m <= n");
  ComplexMatrix z(n, n);
  const double s = real ? 1.0 : std::sqrt(0.5);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = real ? 0.0 : rng.normal();
      z(i, j) = Complex(s * re, s * im);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q.topRows(m);
}

namespace {

int require(const std::optional<int>& v, std::string_view name, FrameFamily family) {
  if (!v) {
    throw Error("frame family '" + std::string(to_string(family)) + "' requires parameter '" +
                std::string(name) + "'");
  }
  return *v;
}

void require_dims(int m, int n, FrameFamily family) {
  if (m < 1 || n < m) {
    throw Error("frame family '" + std::string(to_string(family)) + "' requires 1 <= m <= n");
  }
}

void normalize_columns(ComplexMatrix& f) {
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const double norm = f.col(j).norm();
    if (!(norm > 1e-300)) throw Error("frame construction produced a zero column");
    f.col(j) /= norm;
  }
}

std::vector<int> distinct_sorted_rows(int m, int n, RngStream& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i))) + i;
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

ComplexMatrix character_rows(std::span<const int> rows, int n) {
  ComplexMatrix f(static_cast<Eigen::Index>(rows.size()), n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int g = 0; g < n; ++g) {
      const long long e = (static_cast<long long>(rows[r]) * g) % n;
      f(static_cast<Eigen::Index>(r), g) = std::polar(scale, 2.0 * M_PI * static_cast<double>(e) / n);
    }
  }
  return f;
}

ComplexMatrix paley_conference(int q, bool symmetric) {
  const int order = q + 1;
  ComplexMatrix c = ComplexMatrix::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    c(0, i) = 1.0;
    c(i, 0) = symmetric ? 1.0 : -1.0;
  }
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      c(i + 1, j + 1) = static_cast<double>(legendre(static_cast<long long>(j) - i, q));
    }
  }
  return c;
}

Frame build_lpf(const FrameParams& p) {
  const int m = require(p.m, "m", FrameFamily::lpf);
  const int n = require(p.n, "n", FrameFamily::lpf);
  require_dims(m, n, FrameFamily::lpf);
  ComplexMatrix f(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 1; r <= m; ++r) {
    for (int c = 0; c < n; ++c) {
      const long long e = (static_cast<long long>(r) * c) % n;
      f(r - 1, c) = std::polar(scale, -2.0 * M_PI * static_cast<double>(e) / n);
    }
  }
  return Frame(std::move(f), FrameFamily::lpf, p);
}

Frame build_dss(const FrameParams& p) {
  FrameParams rec = p;
  std::vector<int> set;
  int n = 0;
  if (p.mode == "qr" || (p.mode.empty() && p.q && p.set.empty())) {
    const int q = require(p.q, "q", FrameFamily::dss);
    if (!is_prime(q) || q % 4 != 3) {
      throw Error("dss qr mode needs a prime q = 3 (mod 4), got " + std::to_string(q));
    }
    set = quadratic_residues(q);
    n = q;
    rec.mode = "qr";
  } else {
    n = require(p.n, "n", FrameFamily::dss);
    if (p.set.empty()) throw Error("dss explicit mode requires a nonempty 'set'");
    set.reserve(p.set.size());
    for (const int e : p.set) set.push_back(((e % n) + n) % n);
    const auto check = validate_difference_set({n, set, 0});
    if (!check.is_difference_set) throw Error("dss: the given set is not a difference set");
    rec.mode = "explicit";
  }
  rec.set = set;
  rec.n = n;
  rec.m = static_cast<int>(set.size());
  return Frame(character_rows(set, n), FrameFamily::dss, rec);
}

Frame build_paley(const FrameParams& p, bool real) {
  const FrameFamily family = real ? FrameFamily::paley_real : FrameFamily::paley_complex;
  const int q = require(p.q, "q", family);
  const int residue = real ? 1 : 3;
  if (!is_prime(q) || q % 4 != residue) {
    throw Error(std::string(to_string(family)) + " needs a prime q = " + std::to_string(residue) +
                " (mod 4), got " + std::to_string(q));
  }
  const ComplexMatrix c = paley_conference(q, real);
  const double nu = 1.0 / std::sqrt(static_cast<double>(q));
  const Complex factor = real ? Complex(nu, 0.0) : Complex(0.0, nu);
  const ComplexMatrix g = ComplexMatrix::Identity(q + 1, q + 1) + factor * c;
  FrameParams rec = p;
  rec.m = (q + 1) / 2;
  rec.n = q + 1;
  Frame f = from_gram(g, family, rec);
  if (f.m() != (q + 1) / 2) throw Error("paley: unexpected Gram rank");
  return f;
}

Frame build_steiner_pairs(const FrameParams& p) {
  const int v = require(p.v, "v", FrameFamily::steiner_pairs);
  if (v < 2) throw Error("steiner_pairs needs v >= 2");
  std::vector<std::pair<int, int>> blocks;
  for (int a = 0; a < v; ++a) {
    for (int b = a + 1; b < v; ++b) blocks.emplace_back(a, b);
  }
  const int m = static_cast<int>(blocks.size());
  const int r = v - 1;
  const int n = v * v;
  ComplexMatrix f = ComplexMatrix::Zero(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  for (int x = 0; x < v; ++x) {
    std::vector<int> bx;
    for (int b = 0; b < m; ++b) {
      if (blocks[static_cast<std::size_t>(b)].first == x ||
          blocks[static_cast<std::size_t>(b)].second == x) {
        bx.push_back(b);
      }
    }
    // Row 0 of the v x v DFT is indexed by infinity and dropped.
    for (int z = 0; z < v; ++z) {
      for (int row = 1; row <= r; ++row) {
        const long long e = (static_cast<long long>(row) * z) % v;
        f(bx[static_cast<std::size_t>(row - 1)], x * v + z) =
            std::polar(scale, 2.0 * M_PI * static_cast<double>(e) / v);
      }
    }
  }
  FrameParams rec = p;
  rec.m = m;
  rec.n = n;
  return Frame(std::move(f), FrameFamily::steiner_pairs, rec);
}

Frame build_spikes(const FrameParams& p, bool hadamard) {
  const FrameFamily family = hadamard ? FrameFamily::spikes_hadamard : FrameFamily::spikes_fourier;
  const int m = require(p.m, "m", family);
  if (m < 1) throw Error("spikes frames need m >= 1");
  ComplexMatrix second = hadamard ? ComplexMatrix(sylvester_hadamard(m) / std::sqrt(double(m)))
                                  : unitary_dft(m);
  ComplexMatrix f(m, 2 * m);
  f << ComplexMatrix::Identity(m, m), second;
  FrameParams rec = p;
  rec.n = 2 * m;
  return Frame(std::move(f), family, rec);
}

Frame build_union_bases(const FrameParams& p) {
  const int m = require(p.m, "m", FrameFamily::union_bases);
  if (m < 1) throw Error("union_bases needs m >= 1");
  std::vector<std::string> bases = p.bases;
  if (bases.empty()) {
    const int copies = p.copies.value_or(2);
    if (copies < 1) throw Error("union_bases needs copies >= 1");
    bases.assign(static_cast<std::size_t>(copies), "identity");
  }
  ComplexMatrix f(m, m * static_cast<int>(bases.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    ComplexMatrix basis;
    if (bases[b] == "identity") {
      basis = ComplexMatrix::Identity(m, m);
    } else if (bases[b] == "fourier") {
      basis = unitary_dft(m);
    } else if (bases[b] == "hadamard") {
      basis = sylvester_hadamard(m) / std::sqrt(static_cast<double>(m));
    } else {
      throw Error("union_bases: unknown basis '" + bases[b] + "'");
    }
    f.middleCols(static_cast<Eigen::Index>(b) * m, m) = basis;
  }
  FrameParams rec = p;
  rec.bases = bases;
  rec.copies = static_cast<int>(bases.size());
  rec.n = static_cast<int>(f.cols());
  return Frame(std::move(f), FrameFamily::union_bases, rec);
}

FrameParams with_stream(FrameParams p, const RngStream& rng) {
  p.seed = rng.master_seed();
  p.stream = rng.stream_index();
  return p;
}

Frame build_iid(const FrameParams& p, RngStream& rng) {
  const int m = require(p.m, "m", FrameFamily::iid_gaussian);
  const int n = require(p.n, "n", FrameFamily::iid_gaussian);
  require_dims(m, n, FrameFamily::iid_gaussian);
  const FrameParams rec = with_stream(p, rng);
  ComplexMatrix f(m, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      const double re = rng.normal();
      const double im = p.real ? 0.0 : rng.normal();
      f(i, j) = Complex(re, im);
    }
  }
  normalize_columns(f);
  return Frame(std::move(f), FrameFamily::iid_gaussian, rec);
}

Frame build_haar(const FrameParams& p, RngStream& rng) {
  const int m = require(p.m, "m", FrameFamily::haar);
  const int n = require(p.n, "n", FrameFamily::haar);
  require_dims(m, n, FrameFamily::haar);
  const FrameParams rec = with_stream(p, rng);
  ComplexMatrix f = haar_rows(m, n, rng, p.real);
  normalize_columns(f);
  return Frame(std::move(f), FrameFamily::haar, rec);
}

Frame build_rand_dft(const FrameParams& p, RngStream& rng) {
  const int m = require(p.m, "m", FrameFamily::rand_dft);
  const int n = require(p.n, "n", FrameFamily::rand_dft);
  require_dims(m, n, FrameFamily::rand_dft);
  FrameParams rec = with_stream(p, rng);
  rec.set = distinct_sorted_rows(m, n, rng);
  ComplexMatrix f(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      const long long e = (static_cast<long long>(rec.set[static_cast<std::size_t>(r)]) * c) % n;
      f(r, c) = std::polar(scale, -2.0 * M_PI * static_cast<double>(e) / n);
    }
  }
  return Frame(std::move(f), FrameFamily::rand_dft, rec);
}

Frame build_rand_dct(const FrameParams& p, RngStream& rng) {
  const int m = require(p.m, "m", FrameFamily::rand_dct);
  const int n = require(p.n, "n", FrameFamily::rand_dct);
  require_dims(m, n, FrameFamily::rand_dct);
  FrameParams rec = with_stream(p, rng);
  rec.set = distinct_sorted_rows(m, n, rng);
  ComplexMatrix f(m, n);
  for (int r = 0; r < m; ++r) {
    const int k = rec.set[static_cast<std::size_t>(r)];
    const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      f(r, i) = s * std::cos(M_PI * (2.0 * i + 1.0) * k / (2.0 * n));
    }
  }
  normalize_columns(f);
  return Frame(std::move(f), FrameFamily::rand_dct, rec);
}

}  // namespace

Frame build(FrameFamily family, const FrameParams& params, RngStream* rng) {
  if (is_random_family(family) && rng == nullptr) {
    throw Error("frame family '" + std::string(to_string(family)) + "' requires an rng stream");
  }
  switch (family) {
    case FrameFamily::lpf:
      return build_lpf(params);
    case FrameFamily::dss:
      return build_dss(params);
    case FrameFamily::paley_real:
      return build_paley(params, true);
    case FrameFamily::paley_complex:
      return build_paley(params, false);
    case FrameFamily::steiner_pairs:
      return build_steiner_pairs(params);
    case FrameFamily::spikes_fourier:
      return build_spikes(params, false);
    case FrameFamily::spikes_hadamard:
      return build_spikes(params, true);
    case FrameFamily::union_bases:
      return build_union_bases(params);
    case FrameFamily::iid_gaussian:
      return build_iid(params, *rng);
    case FrameFamily::haar:
      return build_haar(params, *rng);
    case FrameFamily::rand_dft:
      return build_rand_dft(params, *rng);
    case FrameFamily::rand_dct:
      return build_rand_dct(params, *rng);
    case FrameFamily::custom:
      break;
  }
  throw Error("frame family 'custom' cannot be built from parameters");
}

FrameDiagnostics diagnostics(const Frame& frame) {
  const int m = frame.m();
  const int n = frame.n();
  const ComplexMatrix& f = frame.matrix();
  const ComplexMatrix g = numerics::gram(f);

  FrameDiagnostics d;
  numerics::CompensatedSum sq;
  numerics::CompensatedSum abs_sum;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const double a = std::abs(g(i, j));
      d.coherence = std::max(d.coherence, a);
      sq.add(a * a);
      abs_sum.add(a);
    }
  }
  const double pairs = static_cast<double>(n) * (n - 1);
  d.coherence = std::min(d.coherence, 1.0);
  d.welch_ms_lhs = n > 1 ? sq.value() / pairs : 0.0;
  d.welch_ms_rhs = n > 1 ? static_cast<double>(n - m) / (static_cast<double>(n - 1) * m) : 0.0;
  d.welch_max_bound = std::sqrt(std::max(0.0, d.welch_ms_rhs));

  const double mean_abs = n > 1 ? abs_sum.value() / pairs : 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i != j) {
        d.equiangular_residual =
            std::max(d.equiangular_residual, std::abs(std::abs(g(i, j)) - mean_abs));
      }
    }
  }

  const ComplexMatrix frame_op = f * f.adjoint();
  const double a = static_cast<double>(n) / m;
  d.tightness_residual = numerics::max_abs(frame_op - a * ComplexMatrix::Identity(m, m));
  d.is_tight = d.tightness_residual <= 1e-9;
  d.is_etf = d.is_tight && d.equiangular_residual <= 1e-9;
  return d;
}

}  // namespace frames
}  // namespace subframe
