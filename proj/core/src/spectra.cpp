#include "subframe/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace subframe {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::gram:
      return "gram";
    case Side::hessian:
      return "hessian";
    case Side::automatic:
      return "auto";
  }
  return "auto";
}

std::string_view to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::mse:
      return "mse";
    case FunctionalKind::shannon:
      return "shannon";
    case FunctionalKind::rip:
      return "rip";
    case FunctionalKind::cond:
      return "cond";
    case FunctionalKind::strip_indicator:
      return "strip";
  }
  return "mse";
}

FunctionalKind parse_functional(std::string_view name) {
  if (name == "mse") return FunctionalKind::mse;
  if (name == "shannon") return FunctionalKind::shannon;
  if (name == "rip") return FunctionalKind::rip;
  if (name == "cond") return FunctionalKind::cond;
  if (name == "strip" || name == "strip_indicator") return FunctionalKind::strip_indicator;
  throw Error("unknown functional '" + std::string(name) + "'");
}

Esd::Esd(std::vector<double> eigenvalues, Side ambient)
    : values_(std::move(eigenvalues)), ambient_(ambient) {
  for (double& v : values_) {
    if (!std::isfinite(v)) throw Error("esd: non-finite eigenvalue");
    if (v < -1e-9) throw Error("esd: eigenvalue below -1e-9");
    if (v < 0.0) v = 0.0;
  }
  std::sort(values_.begin(), values_.end());
}

namespace spectra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

bool has_singular(std::span<const double> v) {
  const double top = max_of(v);
  return !(top > 0.0) || min_of(v) <= kSingularRel * top;
}

FunctionalResult infinite_result(FunctionalKind kind, int sign) {
  FunctionalResult r;
  r.kind = kind;
  r.infinite = sign;
  r.value = sign * kInf;
  return r;
}

}  // namespace

Esd esd_from_matrix(const ComplexMatrix& h, Side side) {
  return Esd(numerics::herm_eigvals(h), side);
}

Esd esd_of(const Frame& f, const SelectionMask& s, Side side) {
  if (s.empty()) throw Error("esd_of: empty selection mask");
  if (side == Side::automatic) side = s.size() <= f.m() ? Side::gram : Side::hessian;
  const ComplexMatrix fs = subsets::columns(f, s);
  if (side == Side::gram) return esd_from_matrix(fs.adjoint() * fs, Side::gram);
  return esd_from_matrix(fs * fs.adjoint(), Side::hessian);
}

double moment_of(const Esd& e, int r, double normalizer) {
  if (r < 1) throw Error("moment_of: r must be >= 1");
  if (!(normalizer > 0.0)) throw Error("moment_of: normalizer must be positive");
  numerics::CompensatedSum sum;
  for (const double v : e.eigenvalues()) sum.add(std::pow(v, r));
  return sum.value() / normalizer;
}

SpectralSummary summary(const Esd& e, double normalizer) {
  SpectralSummary s;
  for (int r = 1; r <= 6; ++r) s.m[static_cast<std::size_t>(r - 1)] = moment_of(e, r, normalizer);
  const double m1 = s.m[0];
  const double m2 = s.m[1];
  const double m3 = s.m[2];
  const double m4 = s.m[3];
  s.esv = m2 - m1 * m1;
  if (s.esv > 1e-12) {
    s.esk = (m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1) / (s.esv * s.esv);
  }
  if (e.size() > 0) {
    s.lambda_min = e.eigenvalues().front();
    s.lambda_max = e.eigenvalues().back();
  }
  return s;
}

FunctionalResult psi_mse(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw Error("psi_mse: empty spectrum");
  if (has_singular(eigenvalues)) return infinite_result(FunctionalKind::mse, 1);
  numerics::CompensatedSum mean;
  numerics::CompensatedSum inv;
  for (const double v : eigenvalues) {
    mean.add(v);
    inv.add(1.0 / v);
  }
  const double k = static_cast<double>(eigenvalues.size());
  FunctionalResult r;
  r.kind = FunctionalKind::mse;
  r.value = std::max(1.0, (mean.value() / k) * (inv.value() / k));
  return r;
}

FunctionalResult psi_shannon(std::span<const double> hessian_eigenvalues, double log_base) {
  if (hessian_eigenvalues.empty()) throw Error("psi_shannon: empty spectrum");
  if (has_singular(hessian_eigenvalues)) {
    auto r = infinite_result(FunctionalKind::shannon, -1);
    r.params.log_base = log_base;
    return r;
  }
  numerics::CompensatedSum logs;
  numerics::CompensatedSum mean;
  for (const double v : hessian_eigenvalues) {
    logs.add(std::log(v));
    mean.add(v);
  }
  const double m = static_cast<double>(hessian_eigenvalues.size());
  FunctionalResult r;
  r.kind = FunctionalKind::shannon;
  r.params.log_base = log_base;
  r.value = std::min(0.0, (logs.value() / m - std::log(mean.value() / m)) / std::log(log_base));
  return r;
}

FunctionalResult functional(const Frame& f, const SelectionMask& s, FunctionalKind kind,
                            const FunctionalParams& params) {
  if (s.empty()) throw Error("functional: empty selection mask");
  const int k = s.size();
  const int m = f.m();
  FunctionalResult out;
  switch (kind) {
    case FunctionalKind::mse: {
      const Esd e = esd_of(f, s, k <= m ? Side::gram : Side::hessian);
      out = psi_mse(e.eigenvalues());
      break;
    }
    case FunctionalKind::shannon: {
      if (k < m) throw Error("shannon functional needs k >= m");
      const Esd e = esd_of(f, s, Side::hessian);
      out = psi_shannon(e.eigenvalues(), params.log_base);
      break;
    }
    case FunctionalKind::rip:
    case FunctionalKind::strip_indicator: {
      const Esd e = esd_of(f, s, Side::gram);
      const double rip = std::max(e.eigenvalues().back() - 1.0, 1.0 - e.eigenvalues().front());
      out.kind = kind;
      out.value = kind == FunctionalKind::rip ? rip : (rip <= params.delta ? 1.0 : 0.0);
      break;
    }
    case FunctionalKind::cond: {
      const Esd e = esd_of(f, s, Side::gram);
      if (has_singular(e.eigenvalues())) {
        out = infinite_result(kind, 1);
      } else {
        out.kind = kind;
        out.value = std::max(1.0, e.eigenvalues().back() / e.eigenvalues().front());
      }
      break;
    }
  }
  out.params = params;
  return out;
}

FunctionalResult averaged_quantity(const Frame& f, const SelectionMask& s, FunctionalKind kind,
                                   const FunctionalParams& params) {
  FunctionalResult r = functional(f, s, kind, params);
  if (kind == FunctionalKind::mse && r.infinite == 0) {
    r.value = std::log(r.value) / std::log(params.log_base);
  }
  return r;
}

namespace {

struct Accumulator {
  numerics::CompensatedSum w;
  numerics::CompensatedSum s1;
  numerics::CompensatedSum s2;
  std::size_t samples = 0;
  std::size_t infinite = 0;
  std::size_t empty = 0;
  int infinite_sign = 0;

  void add(double weight, const FunctionalResult& r) {
    ++samples;
    if (r.infinite != 0) {
      ++infinite;
      infinite_sign = r.infinite;
      return;
    }
    w.add(weight);
    s1.add(weight * r.value);
    s2.add(weight * r.value * r.value);
  }

  SubsetAverage finish(bool exact) const {
    SubsetAverage out;
    out.exact = exact;
    out.samples = samples;
    out.infinite_count = infinite;
    out.empty_count = empty;
    const double total = w.value();
    out.finite_mean = total > 0.0 ? s1.value() / total : std::numeric_limits<double>::quiet_NaN();
    out.mean = infinite > 0 ? infinite_sign * kInf : out.finite_mean;
    const std::size_t finite = samples - infinite;
    if (!exact && finite >= 2) {
      const double mean = out.finite_mean;
      const double var = std::max(0.0, (s2.value() / total - mean * mean)) *
                         static_cast<double>(finite) / static_cast<double>(finite - 1);
      out.half_width = 1.96 * std::sqrt(var / static_cast<double>(finite));
    }
    return out;
  }
};

}  // namespace

SubsetAverage subset_average(const Frame& f, const SelectionModel& model, FunctionalKind kind,
                             const FunctionalParams& params, std::size_t trials,
                             const RngStream* rng) {
  model.validate(f.n());
  Accumulator acc;
  if (trials == 0) {
    subsets::for_each_mask(model, f.n(), [&](const SelectionMask& s, double weight) {
      if (s.empty()) {
        ++acc.empty;
        return;
      }
      acc.add(weight, averaged_quantity(f, s, kind, params));
    });
    return acc.finish(true);
  }
  if (trials < 2) throw Error("subset_average: Monte-Carlo mode needs trials >= 2");
  if (rng == nullptr) throw Error("subset_average: Monte-Carlo mode needs an rng stream");
  std::vector<std::optional<FunctionalResult>> results(trials);
  numerics::parallel_chunks(trials, [&](std::size_t t) {
    RngStream stream = rng->derive(t);
    const SelectionMask s = subsets::draw(model, f.n(), stream);
    if (!s.empty()) results[t] = averaged_quantity(f, s, kind, params);
  });
  for (const auto& r : results) {
    if (r) {
      acc.add(1.0, *r);
    } else {
      ++acc.empty;
    }
  }
  return acc.finish(false);
}

namespace {

double empirical_right(const std::vector<double>& v, double x) {
  return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) /
         static_cast<double>(v.size());
}

double empirical_left(const std::vector<double>& v, double x) {
  return static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin()) /
         static_cast<double>(v.size());
}

}  // namespace

double ks_distance(const Esd& e, const LimitLaw& law) {
  const auto& v = e.eigenvalues();
  if (v.empty()) throw Error("ks_distance: empty spectrum");
  std::vector<double> points = v;
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (law.family() == LawFamily::manova && law.atom_mass() > 0.0) points.push_back(law.atom_location());
  if (law.zero_atom_mass() > 0.0) points.push_back(0.0);
  double sup = 0.0;
  for (const double x : points) {
    sup = std::max(sup, std::abs(empirical_right(v, x) - law.cdf(x)));
    sup = std::max(sup, std::abs(empirical_left(v, x) - law.cdf_left(x)));
  }
  return sup;
}

double ks_distance(const Esd& a, const Esd& b) {
  const auto& va = a.eigenvalues();
  const auto& vb = b.eigenvalues();
  if (va.empty() || vb.empty()) throw Error("ks_distance: empty spectrum");
  std::vector<double> points;
  points.reserve(va.size() + vb.size());
  std::merge(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(points));
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double sup = 0.0;
  for (const double x : points) {
    sup = std::max(sup, std::abs(empirical_right(va, x) - empirical_right(vb, x)));
    sup = std::max(sup, std::abs(empirical_left(va, x) - empirical_left(vb, x)));
  }
  return sup;
}

void write_esd_csv(const Esd& e, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (const double v : e.eigenvalues()) out << v << '\n';
}

Esd read_esd_csv(const std::filesystem::path& path, Side side) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw Error(path.string() + ": bad eigenvalue line '" + line + "'");
    }
  }
  return Esd(std::move(values), side);
}

nlohmann::json summary_to_json(const SpectralSummary& s, double normalizer) {
  nlohmann::json j;
  for (int r = 1; r <= 6; ++r) j["m" + std::to_string(r)] = s.m[static_cast<std::size_t>(r - 1)];
  j["esv"] = s.esv;
  j["esk"] = s.esk ? nlohmann::json(*s.esk) : nlohmann::json(nullptr);
  j["lambda_min"] = s.lambda_min;
  j["lambda_max"] = s.lambda_max;
  j["normalizer"] = normalizer;
  return j;
}

}  // namespace spectra
}  // namespace subframe
