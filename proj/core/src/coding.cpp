#include "subframe/coding.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace subframe::coding {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  double value = 0.0;
  int infinite = 0;
};

/// Averages sample(mask) exactly (trials == 0) or over Monte-Carlo draws.
SubsetSamples average_over(int n, const SelectionModel& model, std::size_t trials,
                           const RngStream* rng, const std::function<Sample(const SelectionMask&)>& sample) {
  model.validate(n);
  SubsetSamples out;
  numerics::CompensatedSum w;
  numerics::CompensatedSum s1;
  numerics::CompensatedSum s2;
  int sign = 0;
  auto take = [&](double weight, const Sample& v) {
    ++out.average.samples;
    if (v.infinite != 0) {
      ++out.average.infinite_count;
      sign = v.infinite;
      return;
    }
    out.values.push_back(v.value);
    w.add(weight);
    s1.add(weight * v.value);
    s2.add(weight * v.value * v.value);
  };
  if (trials == 0) {
    out.average.exact = true;
    subsets::for_each_mask(model, n, [&](const SelectionMask& s, double weight) {
      if (s.empty()) {
        ++out.average.empty_count;
        return;
      }
      take(weight, sample(s));
    });
  } else {
    if (trials < 2) throw Error("Monte-Carlo averages need trials >= 2");
    if (rng == nullptr) throw Error("Monte-Carlo averages need an rng stream");
    std::vector<std::optional<Sample>> results(trials);
    numerics::parallel_chunks(trials, [&](std::size_t t) {
      RngStream stream = rng->derive(t);
      const SelectionMask s = subsets::draw(model, n, stream);
      if (!s.empty()) results[t] = sample(s);
    });
    for (const auto& r : results) {
      if (r) {
        take(1.0, *r);
      } else {
        ++out.average.empty_count;
      }
    }
  }
  const double total = w.value();
  auto& avg = out.average;
  avg.finite_mean = total > 0.0 ? s1.value() / total : std::numeric_limits<double>::quiet_NaN();
  avg.mean = avg.infinite_count > 0 ? sign * kInf : avg.finite_mean;
  const std::size_t finite = avg.samples - avg.infinite_count;
  if (!avg.exact && finite >= 2) {
    const double var = std::max(0.0, s2.value() / total - avg.finite_mean * avg.finite_mean) *
                       static_cast<double>(finite) / static_cast<double>(finite - 1);
    avg.half_width = 1.96 * std::sqrt(var / static_cast<double>(finite));
  }
  return out;
}

RateResult rate_shell(const Frame& f, const SelectionMask& s) {
  if (s.empty()) throw Error("rate: empty selection mask");
  RateResult r;
  r.beta = static_cast<double>(s.size()) / f.m();
  r.p = static_cast<double>(s.size()) / f.n();
  return r;
}

}  // namespace

LsEncoding ls_encode(const Frame& f, const SelectionMask& s, const ComplexVector& x_s) {
  if (s.empty()) throw Error("ls_encode: empty selection mask");
  if (s.size() > f.m()) throw Error("ls_encode: needs |S| <= m");
  if (x_s.size() != s.size()) throw Error("ls_encode: x_s length must equal |S|");
  const ComplexMatrix fs = subsets::columns(f, s);
  const ComplexMatrix g = fs.adjoint() * fs;
  const auto eig = numerics::herm_eigvals(g);
  if (eig.front() <= spectra::kSingularRel * eig.back()) throw Error("ls_encode: singular Gram");
  const ComplexVector coeffs = g.ldlt().solve(x_s);
  LsEncoding out;
  out.x_tilde = fs * coeffs;
  out.residual = (fs.adjoint() * out.x_tilde - x_s).norm();
  if (out.residual > 1e-9 * std::max(1.0, x_s.norm())) {
    throw Error("ls_encode: interpolation residual above tolerance");
  }
  return out;
}

RateResult ecdq_rate(const Frame& f, const SelectionMask& s, const RdfConfig& cfg) {
  if (!(cfg.sigma_x2 > 0.0) || !(cfg.distortion > 0.0)) {
    throw Error("rate: sigma_x2 and distortion must be positive");
  }
  RateResult r = rate_shell(f, s);
  // Squared singular values of F_S are the Gram spectrum for k <= m and the
  // Hessian spectrum otherwise, matching spectra::functional. The SVD keeps
  // relative accuracy near eps * sqrt(cond), where forming G_S squares it.
  const Eigen::BDCSVD<ComplexMatrix> svd(subsets::columns(f, s));
  const Eigen::VectorXd& sv = svd.singularValues();
  std::vector<double> eig;
  for (Eigen::Index i = sv.size(); i-- > 0;) eig.push_back(sv(i) * sv(i));
  const FunctionalResult psi = spectra::psi_mse(eig);
  if (psi.infinite != 0) {
    r.infinite = true;
    r.psi_mse = kInf;
    r.rate = kInf;
    return r;
  }
  r.psi_mse = psi.value;
  r.rate = r.p / (2.0 * r.beta) * std::log2(1.0 + cfg.sigma_x2 / cfg.distortion * r.beta * psi.value);
  return r;
}

RateResult ecdq_rate_direct(const Frame& f, const SelectionMask& s, const RdfConfig& cfg) {
  RateResult r = rate_shell(f, s);
  if (s.size() > f.m()) throw Error("ecdq_rate_direct: needs |S| <= m");
  // E||x~||^2 = sigma_x^2 tr(G_S^-1) and G_S = R^H R for F_S = QR, so the
  // trace is ||R^-1||_F^2.
  const Eigen::HouseholderQR<ComplexMatrix> qr(subsets::columns(f, s));
  const Eigen::Index k = s.size();
  const ComplexMatrix rmat = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = rmat.diagonal().cwiseAbs();
  if (!(diag.minCoeff() > std::sqrt(spectra::kSingularRel) * diag.maxCoeff())) {
    r.infinite = true;
    r.rate = kInf;
    return r;
  }
  const ComplexMatrix rinv =
      rmat.triangularView<Eigen::Upper>().solve(ComplexMatrix::Identity(k, k));
  const double energy = cfg.sigma_x2 * rinv.squaredNorm();
  const double m = f.m();
  r.rate = m / (2.0 * f.n()) * std::log2(1.0 + energy / (m * cfg.distortion));
  return r;
}

SubsetSamples operational_rdf(const Frame& f, const SelectionModel& model, const RdfConfig& cfg,
                              std::size_t trials, const RngStream* rng) {
  return average_over(f.n(), model, trials, rng, [&](const SelectionMask& s) {
    const RateResult r = ecdq_rate(f, s, cfg);
    return Sample{r.rate, r.infinite ? 1 : 0};
  });
}

double log_det_capacity(const ComplexMatrix& gram, int m, double snr, bool practical) {
  if (!(snr > 0.0)) throw Error("capacity: snr must be positive");
  const auto eig = numerics::herm_eigvals(gram);
  numerics::CompensatedSum sum;
  if (practical) {
    if (eig.empty() || eig.front() <= spectra::kSingularRel * eig.back()) return -kInf;
    for (const double v : eig) sum.add(std::log2(snr * v));
  } else {
    for (const double v : eig) sum.add(std::log2(1.0 + snr * std::max(0.0, v)));
  }
  return sum.value() / m;
}

double log_det_capacity_direct(const ComplexMatrix& gram, int m, double snr, bool practical) {
  const Eigen::Index k = gram.rows();
  const ComplexMatrix a = practical ? ComplexMatrix(snr * gram)
                                    : ComplexMatrix(ComplexMatrix::Identity(k, k) + snr * gram);
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) return -kInf;
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) sum += 2.0 * std::log2(diag(i).real());
  return sum / m;
}

SubsetSamples noma_capacity(const Frame& f, const SelectionModel& model, const CapacityConfig& cfg,
                            std::size_t trials, const RngStream* rng) {
  if (cfg.practical && model.mode == SelectionModel::Mode::combinatorial && model.k > f.m()) {
    throw Error("practical capacity needs k <= m");
  }
  return average_over(f.n(), model, trials, rng, [&](const SelectionMask& s) {
    if (cfg.practical && s.size() > f.m()) throw Error("practical capacity needs k <= m");
    const ComplexMatrix fs = subsets::columns(f, s);
    const double c = log_det_capacity(fs.adjoint() * fs, f.m(), cfg.snr, cfg.practical);
    return std::isinf(c) ? Sample{c, -1} : Sample{c, 0};
  });
}

SubsetSamples stc_bound(const Frame& f, int k, double snr, std::size_t trials, const RngStream* rng) {
  if (k < f.m()) throw Error("stc_bound: needs k >= m");
  if (!(snr > 0.0)) throw Error("stc_bound: snr must be positive");
  const int m = f.m();
  return average_over(f.n(), SelectionModel::combinatorial(k), trials, rng,
                      [&](const SelectionMask& s) {
                        const ComplexMatrix fs = subsets::columns(f, s);
                        const auto eig = numerics::herm_eigvals(fs * fs.adjoint());
                        if (eig.front() <= spectra::kSingularRel * eig.back()) return Sample{kInf, 1};
                        double log_det = 0.0;
                        for (const double v : eig) log_det += std::log(v);
                        return Sample{std::exp(-m * std::log(snr) - log_det), 0};
                      });
}

void write_samples_csv(const std::vector<double>& values, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "value\n";
  for (const double v : values) out << v << '\n';
}

}  // namespace subframe::coding
