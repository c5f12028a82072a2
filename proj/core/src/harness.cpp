#include "subframe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "subframe/limits.hpp"
#include "subframe/spectra.hpp"

namespace subframe {

std::string_view to_string(ConvergenceMetric metric) {
  switch (metric) {
    case ConvergenceMetric::ks:
      return "ks";
    case ConvergenceMetric::mse:
      return "mse";
    case ConvergenceMetric::shannon:
      return "shannon";
    case ConvergenceMetric::moment:
      return "moment";
  }
  return "ks";
}

ConvergenceMetric parse_metric(std::string_view name) {
  if (name == "ks") return ConvergenceMetric::ks;
  if (name == "mse") return ConvergenceMetric::mse;
  if (name == "shannon") return ConvergenceMetric::shannon;
  if (name == "moment") return ConvergenceMetric::moment;
  throw Error("unknown metric '" + std::string(name) + "'");
}

bool ExperimentReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace harness {

using nlohmann::json;

json to_json(const ConvergenceRecord& r) {
  return json{{"family", r.family},
              {"n", r.n},
              {"m", r.m},
              {"k", r.k},
              {"gamma_target", r.gamma_target},
              {"beta_target", r.beta_target},
              {"gamma_realized", r.gamma_realized},
              {"beta_realized", r.beta_realized},
              {"metric", r.metric},
              {"delta_mean", r.delta_mean},
              {"delta_var", r.delta_var},
              {"delta_rms", r.delta_rms},
              {"trials", r.trials},
              {"infinite_count", r.infinite_count}};
}

json to_json(const numerics::FitResult& f) {
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"slope_stderr", f.slope_stderr},
              {"r_squared", f.r_squared}};
}

json to_json(const Verdict& v) {
  return json{{"name", v.name},
              {"pass", v.pass},
              {"measured", v.measured},
              {"tolerance", v.tolerance},
              {"detail", v.detail}};
}

}  // namespace harness

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["config"] = config;
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) j["records"].push_back(harness::to_json(r));
  j["reference_records"] = nlohmann::json::array();
  for (const auto& r : reference_records) j["reference_records"].push_back(harness::to_json(r));
  j["fits"] = nlohmann::json::object();
  for (const auto& [name, f] : fits) j["fits"][name] = harness::to_json(f);
  j["two_factor_fits"] = nlohmann::json::object();
  for (const auto& [name, f] : two_factor_fits) {
    j["two_factor_fits"][name] = nlohmann::json{{"intercept", f.intercept},
                                      {"coef_log", f.coef_log},
                                      {"coef_loglog", f.coef_loglog},
                                      {"stderr_log", f.stderr_log},
                                      {"stderr_loglog", f.stderr_loglog},
                                      {"r_squared", f.r_squared}};
  }
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back(harness::to_json(v));
  j["skipped"] = skipped;
  j["all_passed"] = all_passed();
  return j;
}

namespace harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Verdict verdict(std::string name, bool pass, double measured, double tolerance,
                std::string detail = {}) {
  return Verdict{std::move(name), pass, measured, tolerance, std::move(detail)};
}

// ---------------------------------------------------------------------------
// Convergence

Frame ladder_frame(FrameFamily family, int size, double gamma, RngStream& rng) {
  FrameParams p;
  switch (family) {
    case FrameFamily::dss:
      p.mode = "qr";
      p.q = size;
      break;
    case FrameFamily::paley_real:
    case FrameFamily::paley_complex:
      p.q = size;
      break;
    case FrameFamily::steiner_pairs:
      p.v = size;
      break;
    case FrameFamily::spikes_fourier:
    case FrameFamily::spikes_hadamard:
      p.m = size / 2;
      break;
    default:
      p.n = size;
      p.m = std::max(1, static_cast<int>(std::lround(gamma * size)));
      break;
  }
  return frames::build(family, p, is_random_family(family) ? &rng : nullptr);
}

struct LawTargets {
  double mse = 0.0;
  double shannon = 0.0;
  double moment = 0.0;
};

double delta_for(ConvergenceMetric metric, const std::vector<double>& gram_eigs, int m,
                 const LimitLaw& law, const LawTargets& target, int moment_r) {
  const int k = static_cast<int>(gram_eigs.size());
  switch (metric) {
    case ConvergenceMetric::ks:
      return spectra::ks_distance(Esd(gram_eigs, Side::gram), law);
    case ConvergenceMetric::mse: {
      if (k > m || !std::isfinite(target.mse)) return kInf;
      const FunctionalResult r = spectra::psi_mse(gram_eigs);
      return r.infinite ? kInf : std::abs(r.value - target.mse);
    }
    case ConvergenceMetric::shannon: {
      if (k < m || !std::isfinite(target.shannon)) return kInf;
      const std::vector<double> top(gram_eigs.end() - m, gram_eigs.end());
      const FunctionalResult r = spectra::psi_shannon(top);
      return r.infinite ? kInf : std::abs(r.value - target.shannon);
    }
    case ConvergenceMetric::moment: {
      numerics::CompensatedSum s;
      for (const double v : gram_eigs) s.add(std::pow(v, moment_r));
      return std::abs(s.value() / k - target.moment);
    }
  }
  return kInf;
}

ConvergenceRecord summarize(const std::vector<double>& deltas, ConvergenceRecord rec) {
  numerics::CompensatedSum s1;
  numerics::CompensatedSum s2;
  std::size_t finite = 0;
  for (const double d : deltas) {
    if (!std::isfinite(d)) {
      ++rec.infinite_count;
      continue;
    }
    ++finite;
    s1.add(d);
    s2.add(d * d);
  }
  rec.trials = deltas.size();
  if (finite == 0) {
    rec.delta_mean = rec.delta_var = rec.delta_rms = kInf;
    return rec;
  }
  const double f = static_cast<double>(finite);
  rec.delta_mean = s1.value() / f;
  rec.delta_rms = std::sqrt(s2.value() / f);
  rec.delta_var =
      finite > 1 ? std::max(0.0, s2.value() - f * rec.delta_mean * rec.delta_mean) / (f - 1.0) : 0.0;
  return rec;
}

void add_fits(ExperimentReport& report, const std::vector<ConvergenceRecord>& recs,
              const std::string& metric, const std::string& subject) {
  std::vector<double> ns;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> rms;
  for (const auto& r : recs) {
    if (r.metric != metric) continue;
    if (!(std::isfinite(r.delta_mean) && r.delta_mean > 0.0 && r.delta_var > 0.0)) continue;
    ns.push_back(r.n);
    mean.push_back(r.delta_mean);
    sd.push_back(std::sqrt(r.delta_var));
    rms.push_back(r.delta_rms);
  }
  if (ns.size() < 3) return;
  const std::string base = metric + "/" + subject + "/";
  report.fits[base + "mean"] = numerics::loglog_fit(ns, mean);
  report.fits[base + "sd"] = numerics::loglog_fit(ns, sd);
  report.fits[base + "rms"] = numerics::loglog_fit(ns, rms);
  if (ns.size() >= 4) report.two_factor_fits[base + "mean"] = numerics::loglog_loglog_fit(ns, mean);
}

}  // namespace

std::vector<double> manova_ensemble_sample(int n, int m, int k, RngStream& rng) {
  if (m < 1 || k < 1 || n <= m || k > n) throw Error("manova ensemble: need 1 <= m < n, 1 <= k <= n");
  const double s = std::sqrt(0.5);
  auto gaussian = [&](int rows, int cols) {
    ComplexMatrix g(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        g(i, j) = Complex(s * re, s * im);
      }
    }
    return g;
  };
  const ComplexMatrix a = gaussian(k, n - m);
  const ComplexMatrix b = gaussian(k, m);
  const ComplexMatrix bb = b * b.adjoint();
  const ComplexMatrix total = a * a.adjoint() + bb;
  Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> solver(bb, total, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("manova ensemble: eigensolver failed");
  std::vector<double> out(static_cast<std::size_t>(k));
  const double scale = static_cast<double>(n) / m;
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, scale * solver.eigenvalues()(i));
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentReport run_convergence(const ConvergenceConfig& cfg) {
  if (cfg.trials < 2) throw Error("run_convergence: trials must be >= 2");
  if (cfg.sizes.empty()) throw Error("run_convergence: empty size ladder");
  if (cfg.metrics.empty()) throw Error("run_convergence: no metric requested");
  ExperimentReport report;
  report.kind = "convergence";
  {
    json metrics = nlohmann::json::array();
    for (const auto m : cfg.metrics) metrics.push_back(std::string(to_string(m)));
    report.config = json{{"family", std::string(to_string(cfg.family))},
                         {"sizes", cfg.sizes},
                         {"gamma", cfg.gamma},
                         {"beta", cfg.beta},
                         {"metrics", metrics},
                         {"moment_r", cfg.moment_r},
                         {"trials", cfg.trials},
                         {"seed", cfg.seed},
                         {"selection", cfg.bernoulli ? "bernoulli" : "combinatorial"},
                         {"reference", cfg.reference}};
  }

  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    const int size = cfg.sizes[si];
    RngStream frame_rng(cfg.seed, combine_stream(si, 0xF4A3EULL));
    std::optional<Frame> frame;
    try {
      frame = ladder_frame(cfg.family, size, cfg.gamma, frame_rng);
    } catch (const Error& e) {
      report.skipped.push_back("size " + std::to_string(size) + ": " + e.what());
      continue;
    }
    const int m = frame->m();
    const int n = frame->n();
    if (m >= n) {
      report.skipped.push_back("size " + std::to_string(size) + ": frame is square");
      continue;
    }
    const double gamma_r = static_cast<double>(m) / n;
    SelectionModel model;
    double beta_r = 0.0;
    int k = 0;
    if (cfg.bernoulli) {
      const double p = std::min(1.0, cfg.beta * cfg.gamma);
      model = SelectionModel::bernoulli(p);
      beta_r = p / gamma_r;
    } else {
      k = std::clamp(static_cast<int>(std::lround(cfg.beta * m)), 1, n);
      model = SelectionModel::combinatorial(k);
      beta_r = static_cast<double>(k) / m;
    }
    std::optional<LimitLaw> law;
    try {
      law = LimitLaw::manova(gamma_r, beta_r);
    } catch (const Error& e) {
      report.skipped.push_back("size " + std::to_string(size) + ": " + e.what());
      continue;
    }
    LawTargets target;
    for (const auto metric : cfg.metrics) {
      if (metric == ConvergenceMetric::mse) {
        target.mse = limits::functional_integral(*law, limits::FunctionalKind::mse, 1e-12).value;
      } else if (metric == ConvergenceMetric::shannon) {
        target.shannon = limits::functional_integral(*law, limits::FunctionalKind::shannon, 1e-12).value;
      } else if (metric == ConvergenceMetric::moment) {
        target.moment = law->raw_moment(cfg.moment_r);
      }
    }

    const std::size_t metrics = cfg.metrics.size();
    std::vector<std::vector<double>> subject(metrics, std::vector<double>(cfg.trials, kInf));
    std::vector<std::vector<double>> reference(metrics, std::vector<double>(cfg.trials, kInf));
    std::vector<char> used(cfg.trials, 0);
    numerics::parallel_chunks(cfg.trials, [&](std::size_t t) {
      RngStream rng(cfg.seed, combine_stream(si, t));
      const SelectionMask mask = subsets::draw(model, n, rng);
      if (mask.empty()) return;
      used[t] = 1;
      const Esd esd = spectra::esd_of(*frame, mask, Side::gram);
      for (std::size_t i = 0; i < metrics; ++i) {
        subject[i][t] = delta_for(cfg.metrics[i], esd.eigenvalues(), m, *law, target, cfg.moment_r);
      }
      if (cfg.reference) {
        RngStream ref_rng(cfg.seed, combine_stream(combine_stream(si, t), 1));
        const Esd ref(manova_ensemble_sample(n, m, mask.size(), ref_rng), Side::gram);
        for (std::size_t i = 0; i < metrics; ++i) {
          reference[i][t] = delta_for(cfg.metrics[i], ref.eigenvalues(), m, *law, target, cfg.moment_r);
        }
      }
    });

    for (std::size_t i = 0; i < metrics; ++i) {
      ConvergenceRecord base;
      base.family = std::string(to_string(cfg.family));
      base.n = n;
      base.m = m;
      base.k = k;
      base.gamma_target = cfg.gamma;
      base.beta_target = cfg.beta;
      base.gamma_realized = gamma_r;
      base.beta_realized = beta_r;
      base.metric = std::string(to_string(cfg.metrics[i]));
      std::vector<double> s;
      std::vector<double> r;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        if (!used[t]) continue;
        s.push_back(subject[i][t]);
        r.push_back(reference[i][t]);
      }
      report.records.push_back(summarize(s, base));
      if (cfg.reference) {
        ConvergenceRecord ref = base;
        ref.family = "manova_ensemble";
        report.reference_records.push_back(summarize(r, ref));
      }
    }
  }

  for (const auto metric_tag : cfg.metrics) {
    const std::string metric(to_string(metric_tag));
    add_fits(report, report.records, metric, "frame");
    if (cfg.reference) add_fits(report, report.reference_records, metric, "reference");

    std::vector<double> means;
    for (const auto& r : report.records) {
      if (r.metric == metric && std::isfinite(r.delta_mean)) means.push_back(r.delta_mean);
    }
    if (means.size() < 2) {
      report.skipped.push_back(metric + ": fewer than two sizes with a finite discrepancy");
      continue;
    }
    int violations = 0;
    for (std::size_t i = 1; i < means.size(); ++i) {
      if (!(means[i] < means[i - 1])) ++violations;
    }
    report.verdicts.push_back(verdict(metric + "/delta_mean_strictly_decreasing", violations == 0,
                                      violations, 0, "count of non-decreasing steps"));
    const auto fit = report.fits.find(metric + "/frame/mean");
    if (fit == report.fits.end()) continue;
    const numerics::FitResult& f = fit->second;
    const double t_stat = f.slope_stderr > 0.0 ? f.slope / f.slope_stderr : -kInf;
    report.verdicts.push_back(verdict(metric + "/slope_negative_significant",
                                      f.slope < 0.0 && t_stat < -2.0, t_stat, -2.0,
                                      "slope " + fmt(f.slope) + " stderr " + fmt(f.slope_stderr)));
    if (cfg.reference && metric_tag != ConvergenceMetric::ks) {
      const auto ref = report.fits.find(metric + "/reference/mean");
      if (ref != report.fits.end()) {
        const double combined = std::hypot(f.slope_stderr, ref->second.slope_stderr);
        const double z = combined > 0.0 ? std::abs(f.slope - ref->second.slope) / combined : kInf;
        report.verdicts.push_back(verdict(metric + "/slope_matches_reference", z <= 3.0, z, 3.0,
                                          "frame " + fmt(f.slope) + " reference " +
                                              fmt(ref->second.slope)));
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Verification suite

namespace {

struct NamedFrame {
  std::string name;
  Frame frame;
};

Frame dss7() {
  FrameParams p;
  p.mode = "explicit";
  p.n = 7;
  p.set = {1, 2, 4};
  return frames::build(FrameFamily::dss, p);
}

Frame paley(FrameFamily family, int q) {
  FrameParams p;
  p.q = q;
  return frames::build(family, p);
}

Frame repetition(int m, int copies) {
  FrameParams p;
  p.m = m;
  p.copies = copies;
  return frames::build(FrameFamily::union_bases, p);
}

Frame iid(int m, int n, std::uint64_t seed, std::uint64_t stream, bool real = false) {
  FrameParams p;
  p.m = m;
  p.n = n;
  p.real = real;
  RngStream rng(seed, stream);
  return frames::build(FrameFamily::iid_gaussian, p, &rng);
}

std::vector<NamedFrame> etf_oracle_frames() {
  return {{"pentagon_3x6", frames::pentagon_etf()},
          {"dss_3x7", dss7()},
          {"paley_complex_6x12", paley(FrameFamily::paley_complex, 11)},
          {"paley_real_7x14", paley(FrameFamily::paley_real, 13)}};
}

const std::vector<Rational>& oracle_ps() {
  static const std::vector<Rational> ps{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
  return ps;
}

MomentContext context_for(const Frame& f, const Rational& p) {
  return MomentContext(Rational(f.m(), f.n()), p, f.n());
}

void scope_moments(ExperimentReport& report) {
  for (const auto& [name, f] : etf_oracle_frames()) {
    double worst = 0.0;
    for (const Rational& p : oracle_ps()) {
      const auto e = subsets::exact_moments(f, SelectionModel::bernoulli(numerics::to_double(p)), 4);
      const MomentContext ctx = context_for(f, p);
      for (int r = 1; r <= 4; ++r) {
        const double exact = numerics::to_double(moments::etf_expected_moment(ctx, r));
        worst = std::max(worst, std::abs(e.mean[static_cast<std::size_t>(r - 1)] - exact));
      }
    }
    report.verdicts.push_back(verdict("moments/" + name, worst <= 1e-12, worst, 1e-12,
                                      "max |enumeration - closed form| over r=1..4, p in {1/4,1/2,3/4}"));
  }
}

void scope_variances(ExperimentReport& report) {
  for (const auto& [name, f] : etf_oracle_frames()) {
    double worst = 0.0;
    for (const Rational& p : oracle_ps()) {
      const auto e = subsets::exact_moments(f, SelectionModel::bernoulli(numerics::to_double(p)), 2);
      const MomentContext ctx = context_for(f, p);
      for (int r = 1; r <= 2; ++r) {
        const double exact = numerics::to_double(moments::etf_moment_variance(ctx, r));
        worst = std::max(worst, std::abs(e.variance[static_cast<std::size_t>(r - 1)] - exact));
      }
    }
    report.verdicts.push_back(verdict("variances/" + name, worst <= 1e-12, worst, 1e-12,
                                      "max |enumeration - closed form| over r=1,2"));
  }
}

void scope_ewb(ExperimentReport& report, std::uint64_t seed) {
  const Frame rep = repetition(3, 2);
  double eq_err = 0.0;
  double m4_gap = kInf;
  for (const Rational& p : oracle_ps()) {
    const auto e = subsets::exact_moments(rep, SelectionModel::bernoulli(numerics::to_double(p)), 4);
    const MomentContext ctx = context_for(rep, p);
    for (int r = 2; r <= 3; ++r) {
      eq_err = std::max(eq_err, std::abs(e.mean[static_cast<std::size_t>(r - 1)] -
                                         numerics::to_double(moments::ewb_bound(ctx, r))));
    }
    m4_gap = std::min(m4_gap, e.mean[3] - numerics::to_double(moments::ewb_bound(ctx, 4)));
  }
  report.verdicts.push_back(verdict("ewb/repetition_3x6_m2_m3_equal", eq_err <= 1e-12, eq_err, 1e-12));
  report.verdicts.push_back(verdict("ewb/repetition_3x6_m4_exceeds", m4_gap >= 1e-6, m4_gap, 1e-6,
                                    "min over p of m4 - bound"));

  const Frame g = iid(4, 8, seed, 4);
  double m2_gap = kInf;
  for (const Rational& p : oracle_ps()) {
    const auto e = subsets::exact_moments(g, SelectionModel::bernoulli(numerics::to_double(p)), 2);
    m2_gap = std::min(m2_gap, e.mean[1] - numerics::to_double(moments::ewb_bound(context_for(g, p), 2)));
  }
  report.verdicts.push_back(verdict("ewb/iid_4x8_m2_exceeds", m2_gap > 0.0, m2_gap, 0.0,
                                    "min over p of m2 - bound"));
}

void scope_esv_esk(ExperimentReport& report, std::uint64_t seed) {
  std::vector<NamedFrame> list = etf_oracle_frames();
  list.push_back({"repetition_3x6", repetition(3, 2)});
  list.push_back({"iid_4x8", iid(4, 8, seed, 4)});
  for (const auto& [name, f] : list) {
    const bool tight = frames::diagnostics(f).is_tight;
    double esv_margin = kInf;
    double esk_margin = kInf;
    for (const Rational& p : oracle_ps()) {
      const auto e = subsets::exact_moments(f, SelectionModel::bernoulli(numerics::to_double(p)), 4);
      const auto b = moments::esv_esk_bounds(context_for(f, p));
      const double m1 = e.mean[0];
      const double m2 = e.mean[1];
      const double m3 = e.mean[2];
      const double m4 = e.mean[3];
      const double esv = m2 - m1 * m1;
      const double esk = (m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1) / (esv * esv);
      esv_margin = std::min(esv_margin, esv - numerics::to_double(b.esv));
      esk_margin = std::min(esk_margin, esk - numerics::to_double(b.esk));
    }
    report.verdicts.push_back(verdict("esv_esk/esv_" + name, esv_margin >= -1e-12, esv_margin, -1e-12,
                                      "min over p of ESV - bound"));
    if (tight) {
      report.verdicts.push_back(verdict("esv_esk/esk_" + name, esk_margin >= -1e-12, esk_margin,
                                        -1e-12, "min over p of ESK - bound (tight frame)"));
    }
  }
}

double exhaustive_average(const Frame& f, int k, FunctionalKind kind) {
  return spectra::subset_average(f, SelectionModel::combinatorial(k), kind, {}, 0, nullptr).mean;
}

int monotone_violations(const std::vector<double>& values) {
  int violations = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double a = values[i - 1];
    const double b = values[i];
    if (std::isinf(a) && a > 0 && !(std::isinf(b) && b > 0)) {
      ++violations;
    } else if (std::isfinite(a) && std::isfinite(b) && b < a - 1e-12) {
      ++violations;
    } else if (std::isfinite(a) && std::isinf(b) && b < 0) {
      ++violations;
    }
  }
  return violations;
}

std::string frame_label(const Frame& f, std::size_t index) {
  return std::to_string(index) + "_" + std::string(to_string(f.family())) + "_" +
         std::to_string(f.m()) + "x" + std::to_string(f.n());
}

void scope_monotonicity_shannon(ExperimentReport& report, std::uint64_t seed) {
  const auto zoo = small_frame_zoo(seed);
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    const Frame& f = zoo[i];
    std::vector<double> values;
    for (int k = f.m(); k <= f.n(); ++k) values.push_back(exhaustive_average(f, k, FunctionalKind::shannon));
    const int v = monotone_violations(values);
    report.verdicts.push_back(verdict("monotonicity_shannon/" + frame_label(f, i), v == 0, v, 0,
                                      "L_Shannon over k = m..n"));
  }
}

void scope_monotonicity_mse(ExperimentReport& report, std::uint64_t seed) {
  const auto zoo = small_frame_zoo(seed);
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    const Frame& f = zoo[i];
    std::vector<double> values;
    for (int k = 1; k <= f.m(); ++k) values.push_back(exhaustive_average(f, k, FunctionalKind::mse));
    const int v = monotone_violations(values);
    const bool base = std::abs(values.front()) <= 1e-12;
    report.verdicts.push_back(verdict("monotonicity_mse/" + frame_label(f, i), v == 0 && base, v, 0,
                                      "L_MSE over k = 1..m; L_MSE(F,1) = " + fmt(values.front())));
  }
}

void scope_lemma_avg(ExperimentReport& report, std::uint64_t seed) {
  const auto zoo = small_frame_zoo(seed);
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    const Frame& f = zoo[i];
    const ComplexMatrix full = f.matrix() * f.matrix().adjoint();
    double worst = 0.0;
    for (int k = 1; k <= f.n(); ++k) {
      ComplexMatrix mean = ComplexMatrix::Zero(f.m(), f.m());
      subsets::for_each_mask(SelectionModel::combinatorial(k), f.n(),
                             [&](const SelectionMask& s, double w) {
                               mean += w * subsets::subframe_gram(f, s).hessian;
                             });
      const double scale = static_cast<double>(k) / f.n();
      worst = std::max(worst, numerics::max_abs(mean - scale * full));
    }
    report.verdicts.push_back(verdict("lemma_avg/" + frame_label(f, i), worst <= 1e-10, worst, 1e-10,
                                      "max entry error over k = 1..n"));
  }
}

void scope_identity(ExperimentReport& report) {
  const std::vector<Rational> gammas{Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(2, 3)};
  const std::vector<Rational> ps{Rational(1, 5), Rational(1, 2), Rational(4, 5)};
  for (const auto& g : gammas) {
    for (const auto& p : ps) {
      const auto checks = moments::manova_identity_check(MomentContext(g, p), 8);
      int mismatches = 0;
      for (const auto& c : checks) mismatches += c.equal ? 0 : 1;
      report.verdicts.push_back(verdict("identity_check/gamma=" + numerics::to_string(g) +
                                            ",p=" + numerics::to_string(p),
                                        mismatches == 0, mismatches, 0, "r = 1..8, exact rationals"));
    }
  }
}

}  // namespace

std::vector<Frame> small_frame_zoo(std::uint64_t seed) {
  std::vector<Frame> zoo;
  auto det = [&](FrameFamily family, FrameParams p) { zoo.push_back(frames::build(family, p)); };
  auto rnd = [&](FrameFamily family, FrameParams p, std::uint64_t stream) {
    RngStream rng(seed, 100 + stream);
    zoo.push_back(frames::build(family, p, &rng));
  };
  auto mn = [](int m, int n) {
    FrameParams p;
    p.m = m;
    p.n = n;
    return p;
  };

  zoo.push_back(frames::mercedes_benz());
  zoo.push_back(frames::pentagon_etf());
  zoo.push_back(dss7());
  zoo.push_back(paley(FrameFamily::paley_complex, 3));
  zoo.push_back(paley(FrameFamily::paley_real, 5));
  {
    FrameParams p;
    p.v = 3;
    det(FrameFamily::steiner_pairs, p);
  }
  det(FrameFamily::lpf, mn(2, 5));
  det(FrameFamily::lpf, mn(3, 8));
  det(FrameFamily::lpf, mn(4, 10));
  {
    FrameParams p;
    p.m = 4;
    det(FrameFamily::spikes_fourier, p);
    det(FrameFamily::spikes_hadamard, p);
    p.m = 5;
    det(FrameFamily::spikes_fourier, p);
  }
  zoo.push_back(repetition(3, 2));
  zoo.push_back(repetition(2, 3));
  {
    FrameParams p;
    p.m = 4;
    p.bases = {"identity", "hadamard"};
    det(FrameFamily::union_bases, p);
  }

  rnd(FrameFamily::iid_gaussian, mn(3, 7), 0);
  rnd(FrameFamily::iid_gaussian, mn(4, 8), 1);
  rnd(FrameFamily::haar, mn(4, 8), 2);
  rnd(FrameFamily::haar, mn(3, 9), 3);
  rnd(FrameFamily::rand_dft, mn(4, 9), 4);
  rnd(FrameFamily::rand_dct, mn(4, 10), 5);
  {
    FrameParams p = mn(5, 10);
    p.real = true;
    rnd(FrameFamily::iid_gaussian, p, 6);
  }
  rnd(FrameFamily::rand_dft, mn(3, 6), 7);
  return zoo;
}

ExperimentReport run_verification_suite(const std::vector<std::string>& scopes, std::uint64_t seed) {
  ExperimentReport report;
  report.kind = "verification";
  report.config = json{{"scopes", scopes}, {"seed", seed}};
  for (const auto& scope : scopes) {
    if (std::find(kVerificationScopes.begin(), kVerificationScopes.end(), scope) ==
        kVerificationScopes.end()) {
      throw Error("unknown verification scope '" + scope + "'");
    }
  }
  for (const auto& scope : scopes) {
    if (scope == "moments") scope_moments(report);
    if (scope == "variances") scope_variances(report);
    if (scope == "ewb") scope_ewb(report, seed);
    if (scope == "esv_esk") scope_esv_esk(report, seed);
    if (scope == "monotonicity_shannon") scope_monotonicity_shannon(report, seed);
    if (scope == "monotonicity_mse") scope_monotonicity_mse(report, seed);
    if (scope == "lemma_avg") scope_lemma_avg(report, seed);
    if (scope == "identity_check") scope_identity(report);
  }
  return report;
}

}  // namespace harness
}  // namespace subframe
