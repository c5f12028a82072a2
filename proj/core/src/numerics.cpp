#include "subframe/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace subframe::numerics {

void require_finite(const ComplexMatrix& m, std::string_view what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex v = m(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw Error(std::string(what) + " has a non-finite entry");
      }
    }
  }
}

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, j)));
  }
  return best;
}

namespace {

ComplexMatrix symmetrized(const ComplexMatrix& g) {
  if (g.rows() != g.cols()) {
    throw Error("herm_eig: matrix is " + std::to_string(g.rows()) + "x" +
                std::to_string(g.cols()) + ", expected square");
  }
  require_finite(g, "herm_eig input");
  const double scale = max_abs(g);
  const double asym = max_abs(g - g.adjoint());
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "herm_eig: asymmetry " << asym << " exceeds 1e-12 * " << scale;
    throw Error(os.str());
  }
  return (g + g.adjoint()) * 0.5;
}

}  // namespace

HermitianEigen herm_eig(const ComplexMatrix& g) {
  const ComplexMatrix h = symmetrized(g);
  HermitianEigen out;
  if (h.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("herm_eig: eigensolver did not converge");
  out.values.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = solver.eigenvectors();
  return out;
}

std::vector<double> herm_eigvals(const ComplexMatrix& g) {
  const ComplexMatrix h = symmetrized(g);
  if (h.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("herm_eig: eigensolver did not converge");
  return {solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size()};
}

ComplexMatrix gram(const ComplexMatrix& f) {
  ComplexMatrix g = f.adjoint() * f;
  // Exact Hermitian symmetry keeps downstream asymmetry checks quiet.
  return (g + g.adjoint()) * 0.5;
}

// ---------------------------------------------------------------------------

double simpson(const std::function<double(double)>& g, double a, double b, double abs_tol,
               const QuadratureOptions& opts) {
  if (!(a < b)) throw Error("quadrature: require lo < hi");
  if (!(abs_tol > 0.0)) throw Error("quadrature: abs_tol must be positive");
  if (opts.initial_panels < 2 || opts.initial_panels % 2 != 0) {
    throw Error("quadrature: initial panel count must be even and >= 2");
  }

  auto endpoint = [&](double at, double inward) {
    double v = g(at);
    if (!std::isfinite(v)) v = g(at + inward * 1e-9 * (b - a));
    if (!std::isfinite(v)) throw Error("quadrature: integrand not finite near an endpoint");
    return v;
  };
  auto interior = [&](double at) {
    const double v = g(at);
    if (!std::isfinite(v)) throw Error("quadrature: integrand not finite in the interior");
    return v;
  };

  const double ends = endpoint(a, 1.0) + endpoint(b, -1.0);

  std::size_t panels = opts.initial_panels;
  double h = (b - a) / static_cast<double>(panels);
  CompensatedSum odd;
  CompensatedSum even;
  for (std::size_t i = 1; i < panels; ++i) {
    const double v = interior(a + static_cast<double>(i) * h);
    (i % 2 == 1 ? odd : even).add(v);
  }
  double estimate = h / 3.0 * (ends + 4.0 * odd.value() + 2.0 * even.value());
  // Every node of the current level becomes an even node of the next.
  CompensatedSum old_interior = odd;
  old_interior.merge(even);

  while (panels < opts.max_panels) {
    panels *= 2;
    h *= 0.5;
    CompensatedSum fresh;
    for (std::size_t i = 1; i < panels; i += 2) fresh.add(interior(a + static_cast<double>(i) * h));
    const double next = h / 3.0 * (ends + 4.0 * fresh.value() + 2.0 * old_interior.value());
    old_interior.merge(fresh);
    const bool converged = std::abs(next - estimate) <= abs_tol;
    estimate = next;
    if (converged) break;
  }
  return estimate;
}

double integrate_edge_singular(const std::function<double(double)>& f, double lo, double hi,
                               double abs_tol, const QuadratureOptions& opts) {
  if (!(lo < hi)) throw Error("integrate_edge_singular: require lo < hi");
  if (!(abs_tol > 0.0)) throw Error("integrate_edge_singular: abs_tol must be positive");
  const double w = hi - lo;
  auto transformed = [&](double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double x = lo + w * s * s;
    return f(x) * 2.0 * w * s * c;
  };
  return simpson(transformed, 0.0, M_PI / 2.0, abs_tol, opts);
}

// ---------------------------------------------------------------------------

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) noexcept {
  add(other.sum_);
  add(other.comp_);
}

// ---------------------------------------------------------------------------

namespace {

void check_fit_inputs(std::span<const double> xs, std::span<const double> ys, std::size_t min_n) {
  if (xs.size() != ys.size()) throw Error("fit: xs and ys differ in length");
  if (xs.size() < min_n) throw Error("fit: need at least " + std::to_string(min_n) + " points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw Error("fit: values must be strictly positive");
  }
}

}  // namespace

FitResult loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  check_fit_inputs(xs, ys, 3);
  const auto n = static_cast<double>(xs.size());
  std::vector<double> lx(xs.size());
  std::vector<double> ly(ys.size());
  std::transform(xs.begin(), xs.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(ys.begin(), ys.end(), ly.begin(), [](double v) { return std::log(v); });
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw Error("loglog_fit: all x values are equal");
  FitResult out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (out.intercept + out.slope * lx[i]);
    ssr += r * r;
  }
  out.slope_stderr = std::sqrt(std::max(0.0, ssr / (n - 2.0) / sxx));
  out.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return out;
}

LogLogLogFit loglog_loglog_fit(std::span<const double> ns, std::span<const double> ys) {
  check_fit_inputs(ns, ys, 4);
  const auto rows = static_cast<Eigen::Index>(ns.size());
  Eigen::MatrixXd x(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double ln = std::log(ns[static_cast<std::size_t>(i)]);
    if (!(ln > 0.0)) throw Error("loglog_loglog_fit: n must exceed 1");
    x(i, 0) = 1.0;
    x(i, 1) = ln;
    x(i, 2) = std::log(ln);
    y(i) = std::log(ys[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::VectorXd beta = ldlt.solve(x.transpose() * y);
  const Eigen::VectorXd resid = y - x * beta;
  const double ssr = resid.squaredNorm();
  const double sigma2 = ssr / static_cast<double>(rows - 3);
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(3, 3)) * sigma2;
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  LogLogLogFit out;
  out.intercept = beta(0);
  out.coef_log = beta(1);
  out.coef_loglog = beta(2);
  out.stderr_log = std::sqrt(std::max(0.0, cov(1, 1)));
  out.stderr_loglog = std::sqrt(std::max(0.0, cov(2, 2)));
  out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  return out;
}

// ---------------------------------------------------------------------------

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s.empty()) throw Error("parse_rational: empty input");
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      const BigInt num(s.substr(0, slash));
      const BigInt den(s.substr(slash + 1));
      if (den == 0) throw Error("parse_rational: zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    if (const auto dot = s.find('.'); dot != std::string::npos) {
      const bool negative = !s.empty() && s[0] == '-';
      std::string whole = s.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
      const std::string frac = s.substr(dot + 1);
      if (whole.empty()) whole = "0";
      BigInt den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const BigInt num = BigInt(whole) * den + (frac.empty() ? BigInt(0) : BigInt(frac));
      Rational q(num, den);
      return negative ? Rational(-q) : q;
    }
    return Rational(BigInt(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error("parse_rational: cannot parse '" + s + "'");
  }
}

std::string to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

// ---------------------------------------------------------------------------

void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(chunks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) body(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace subframe::numerics
