#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "subframe/coding.hpp"
#include "subframe/frame_io.hpp"
#include "subframe/frames.hpp"
#include "subframe/harness.hpp"
#include "subframe/limits.hpp"
#include "subframe/moments.hpp"
#include "subframe/spectra.hpp"
#include "subframe/subsets.hpp"

using namespace subframe;
using nlohmann::json;

namespace {

// Every numeric flag is read as text so "a/b" rationals work everywhere.
double real_arg(const std::string& text) { return numerics::to_double(numerics::parse_rational(text)); }

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_json(j, out);
  }
}

json diagnostics_json(const FrameDiagnostics& d) {
  return json{{"coherence", d.coherence},
              {"welch_max_bound", d.welch_max_bound},
              {"welch_ms_lhs", d.welch_ms_lhs},
              {"welch_ms_rhs", d.welch_ms_rhs},
              {"tightness_residual", d.tightness_residual},
              {"equiangular_residual", d.equiangular_residual},
              {"is_tight", d.is_tight},
              {"is_etf", d.is_etf}};
}

json samples_json(const SubsetSamples& s) {
  const auto& a = s.average;
  return json{{"mean", a.mean},           {"finite_mean", a.finite_mean}, {"half_width", a.half_width},
              {"samples", a.samples},     {"infinite_count", a.infinite_count},
              {"empty_count", a.empty_count}, {"exact", a.exact}};
}

struct Sampling {
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  void add(CLI::App* app) {
    app->add_option("--trials", trials, "Monte-Carlo draws; 0 enumerates every subset");
    app->add_option("--seed", seed, "master seed");
  }
  [[nodiscard]] std::optional<RngStream> stream() const {
    if (trials == 0) return std::nullopt;
    return RngStream(seed, 0);
  }
};

struct MomentArgs {
  std::string gamma;
  std::string p;
  std::optional<int> n;
  int r = 1;
  int rmax = 4;
  void add(CLI::App* app, bool with_r, bool with_rmax) {
    app->add_option("--gamma", gamma, "m/n as a rational")->required();
    app->add_option("--p", p, "selection probability as a rational")->required();
    app->add_option("--n", n, "frame size");
    if (with_r) app->add_option("--r", r, "moment order")->required();
    if (with_rmax) app->add_option("--rmax", rmax, "highest moment order");
  }
  [[nodiscard]] MomentContext context() const {
    return MomentContext(numerics::parse_rational(gamma), numerics::parse_rational(p), n);
  }
};

json rational_json(const Rational& q) {
  return json{{"value", numerics::to_string(q)}, {"approx", numerics::to_double(q)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-frame spectra, limit laws and exact moment tools"};
  app.require_subcommand(1);
  int status = 0;

  // frame build / check
  auto* frame = app.add_subcommand("frame", "build or inspect a frame");
  frame->require_subcommand(1);
  auto* fbuild = frame->add_subcommand("build", "construct a frame and write it as JSON");
  std::string family;
  std::optional<int> q, v, m, n, copies;
  std::vector<int> set;
  std::string mode, bases, out;
  bool real = false;
  std::optional<std::uint64_t> fseed;
  fbuild->add_option("--family", family, "frame family tag")->required();
  fbuild->add_option("--q", q, "prime or modulus");
  fbuild->add_option("--v", v, "Steiner parameter");
  fbuild->add_option("--m", m, "rows");
  fbuild->add_option("--n", n, "columns, or modulus for an explicit difference set");
  fbuild->add_option("--copies", copies, "identity copies for union_bases");
  fbuild->add_option("--bases", bases, "comma list of bases for union_bases");
  fbuild->add_option("--mode", mode, "dss mode: qr or explicit");
  fbuild->add_option("--set", set, "difference set elements")->delimiter(',');
  fbuild->add_flag("--real", real, "real-valued variant where available");
  fbuild->add_option("--seed", fseed, "seed for random families");
  fbuild->add_option("--out", out, "output path")->required();
  fbuild->callback([&] {
    FrameParams p;
    p.q = q;
    p.v = v;
    p.m = m;
    p.n = n;
    p.copies = copies;
    p.set = set;
    p.mode = mode.empty() && q && parse_family(family) == FrameFamily::dss ? "qr" : mode;
    p.bases = split(bases);
    p.real = real;
    p.seed = fseed;
    const FrameFamily fam = parse_family(family);
    std::optional<RngStream> rng;
    if (is_random_family(fam)) rng.emplace(fseed.value_or(1), 0);
    const Frame f = frames::build(fam, p, rng ? &*rng : nullptr);
    io::write_frame(f, out);
    std::cout << json{{"m", f.m()}, {"n", f.n()}, {"family", to_string(fam)}, {"out", out}}.dump() << '\n';
  });

  auto* fcheck = frame->add_subcommand("check", "print diagnostics of a frame file");
  std::string check_path;
  fcheck->add_option("path", check_path, "frame JSON")->required();
  fcheck->callback([&] {
    const Frame f = io::read_frame(check_path);
    json j = diagnostics_json(frames::diagnostics(f));
    j["m"] = f.m();
    j["n"] = f.n();
    j["family"] = to_string(f.family());
    std::cout << j.dump(2) << '\n';
  });

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "pooled sub-frame eigenvalues over random selections");
  std::string frame_path, select;
  Sampling sampling;
  sampling.trials = 1;
  spectrum->add_option("--frame", frame_path, "frame JSON")->required();
  spectrum->add_option("--select", select, "comb:k or bern:p")->required();
  sampling.add(spectrum);
  spectrum->add_option("--out", out, "ESD CSV path")->required();
  spectrum->callback([&] {
    const Frame f = io::read_frame(frame_path);
    const SelectionModel model = parse_selection(select);
    model.validate(f.n());
    RngStream rng(sampling.seed, 0);
    std::vector<double> pooled;
    std::size_t used = 0;
    for (std::size_t t = 0; t < std::max<std::size_t>(sampling.trials, 1); ++t) {
      RngStream trial = rng.derive(t);
      const SelectionMask s = subsets::draw(model, f.n(), trial);
      if (s.empty()) continue;
      const Esd e = spectra::esd_of(f, s, Side::gram);
      pooled.insert(pooled.end(), e.eigenvalues().begin(), e.eigenvalues().end());
      ++used;
    }
    if (pooled.empty()) throw Error("every drawn selection was empty");
    const Esd all(pooled, Side::gram);
    spectra::write_esd_csv(all, out);
    json j = spectra::summary_to_json(spectra::summary(all, static_cast<double>(pooled.size())),
                                      static_cast<double>(pooled.size()));
    j["draws"] = used;
    j["eigenvalues"] = pooled.size();
    std::cout << j.dump(2) << '\n';
  });

  // law
  auto* law = app.add_subcommand("law", "evaluate a limiting law");
  std::string law_family = "manova", gamma_s = "1/2", beta_s;
  std::optional<std::string> density_x, cdf_x;
  std::optional<int> moment_r;
  law->add_option("--family", law_family, "mp or manova");
  law->add_option("--gamma", gamma_s, "m/n (manova)");
  law->add_option("--beta", beta_s, "k/m")->required();
  auto* g_density = law->add_option("--density", density_x, "density at x");
  auto* g_cdf = law->add_option("--cdf", cdf_x, "CDF at x");
  auto* g_moment = law->add_option("--moment", moment_r, "raw moment of order r");
  g_density->excludes(g_cdf)->excludes(g_moment);
  g_cdf->excludes(g_moment);
  law->callback([&] {
    const double beta = real_arg(beta_s);
    const LimitLaw l = parse_law_family(law_family) == LawFamily::mp ? LimitLaw::mp(beta)
                                                                      : LimitLaw::manova(real_arg(gamma_s), beta);
    json j{{"family", to_string(l.family())}, {"gamma", l.gamma()}, {"beta", l.beta()},
           {"lambda_minus", l.lambda_minus()}, {"lambda_plus", l.lambda_plus()},
           {"atom_mass", l.atom_mass()}, {"zero_atom_mass", l.zero_atom_mass()}};
    if (density_x) j["density"] = l.density(real_arg(*density_x));
    if (cdf_x) j["cdf"] = l.cdf(real_arg(*cdf_x));
    if (moment_r) j["moment"] = l.raw_moment(*moment_r);
    std::cout << j.dump(2) << '\n';
  });

  // moments
  auto* mom = app.add_subcommand("moments", "exact sub-frame moment formulas");
  mom->require_subcommand(1);
  MomentArgs exact_args, var_args, asym_args, id_args;
  auto* mexact = mom->add_subcommand("exact", "expected ETF moment, r = 1..4");
  exact_args.add(mexact, true, false);
  mexact->callback([&] {
    std::cout << rational_json(moments::etf_expected_moment(exact_args.context(), exact_args.r)).dump() << '\n';
  });
  auto* mvar = mom->add_subcommand("var", "ETF moment variance, r = 1..2");
  var_args.add(mvar, true, false);
  mvar->callback([&] {
    std::cout << rational_json(moments::etf_moment_variance(var_args.context(), var_args.r)).dump() << '\n';
  });
  auto* masym = mom->add_subcommand("asymptotic", "partition-engine asymptotic moments");
  asym_args.add(masym, false, true);
  masym->callback([&] {
    const MomentContext ctx = asym_args.context();
    json rows = json::array();
    for (int r = 1; r <= asym_args.rmax; ++r) {
      const RationalPolynomial poly = moments::asymptotic_moment(ctx, r);
      json coeffs = json::array();
      for (const auto& c : poly.coeffs) coeffs.push_back(numerics::to_string(c));
      json row = rational_json(poly.evaluate(ctx.p));
      row["r"] = r;
      row["coefficients_in_p"] = coeffs;
      rows.push_back(row);
    }
    std::cout << rows.dump(2) << '\n';
  });
  auto* mid = mom->add_subcommand("identity", "asymptotic moments against the MANOVA moments");
  id_args.add(mid, false, true);
  mid->callback([&] {
    json rows = json::array();
    bool ok = true;
    for (const auto& v : moments::manova_identity_check(id_args.context(), id_args.rmax)) {
      ok = ok && v.equal;
      rows.push_back(json{{"r", v.r},
                          {"asymptotic", numerics::to_string(v.asymptotic)},
                          {"manova", numerics::to_string(v.manova)},
                          {"equal", v.equal}});
    }
    std::cout << json{{"checks", rows}, {"all_equal", ok}}.dump(2) << '\n';
    if (!ok) status = 1;
  });

  // rdf
  auto* rdf = app.add_subcommand("rdf", "operational rate of the ECDQ analog codec");
  std::string sdr = "100";
  std::string csv;
  Sampling rdf_sampling;
  rdf->add_option("--frame", frame_path, "frame JSON")->required();
  rdf->add_option("--select", select, "comb:k or bern:p")->required();
  rdf->add_option("--sdr", sdr, "sigma_x^2 / D");
  rdf->add_option("--csv", csv, "per-subset rate histogram input");
  rdf_sampling.add(rdf);
  rdf->callback([&] {
    const Frame f = io::read_frame(frame_path);
    RdfConfig cfg;
    cfg.sigma_x2 = real_arg(sdr);
    const auto rng = rdf_sampling.stream();
    const auto res = coding::operational_rdf(f, parse_selection(select), cfg, rdf_sampling.trials,
                                             rng ? &*rng : nullptr);
    if (!csv.empty()) coding::write_samples_csv(res.values, csv);
    json j = samples_json(res);
    j["unit"] = "bits per source sample";
    std::cout << j.dump(2) << '\n';
  });

  // capacity
  auto* cap = app.add_subcommand("capacity", "average NOMA capacity over k-subsets");
  int k = 1;
  std::string snr = "100";
  bool practical = false;
  Sampling cap_sampling;
  cap->add_option("--frame", frame_path, "frame JSON")->required();
  cap->add_option("--k", k, "active users")->required();
  cap->add_option("--snr", snr, "linear SNR");
  cap->add_flag("--practical", practical, "drop the identity inside the log-determinant");
  cap_sampling.add(cap);
  cap->callback([&] {
    const Frame f = io::read_frame(frame_path);
    CapacityConfig cfg;
    cfg.snr = real_arg(snr);
    cfg.practical = practical;
    const auto rng = cap_sampling.stream();
    json j = samples_json(coding::noma_capacity(f, SelectionModel::combinatorial(k), cfg, cap_sampling.trials,
                                                rng ? &*rng : nullptr));
    j["unit"] = "bits per resource";
    std::cout << j.dump(2) << '\n';
  });

  // stc
  auto* stc = app.add_subcommand("stc", "space-time code subset-determinant bound");
  Sampling stc_sampling;
  stc->add_option("--frame", frame_path, "frame JSON")->required();
  stc->add_option("--k", k, "columns per subset, k >= m")->required();
  stc->add_option("--snr", snr, "linear SNR");
  stc_sampling.add(stc);
  stc->callback([&] {
    const Frame f = io::read_frame(frame_path);
    const auto rng = stc_sampling.stream();
    std::cout << samples_json(coding::stc_bound(f, k, real_arg(snr), stc_sampling.trials, rng ? &*rng : nullptr))
                     .dump(2)
              << '\n';
  });

  // converge
  auto* conv = app.add_subcommand("converge", "convergence-rate experiment over a size ladder");
  ConvergenceConfig ccfg;
  std::string sizes, metrics = "ks", cgamma = "1/2", cbeta = "4/5";
  bool no_reference = false;
  conv->add_option("--family", family, "frame family tag")->required();
  conv->add_option("--sizes", sizes, "comma list of ladder sizes")->required();
  conv->add_option("--gamma", cgamma, "target m/n");
  conv->add_option("--beta", cbeta, "target k/m");
  conv->add_option("--metric", metrics, "comma list of ks, mse, shannon, moment");
  conv->add_option("--moment-r", ccfg.moment_r, "order for the moment metric");
  conv->add_option("--trials", ccfg.trials, "draws per size");
  conv->add_option("--seed", ccfg.seed, "master seed");
  conv->add_flag("--bernoulli", ccfg.bernoulli, "Bernoulli instead of fixed-size selection");
  conv->add_flag("--no-reference", no_reference, "skip the MANOVA-ensemble reference ladder");
  conv->add_option("--out", out, "report path (stdout if omitted)");
  conv->callback([&] {
    ccfg.family = parse_family(family);
    ccfg.sizes.clear();
    for (const auto& s : split(sizes)) ccfg.sizes.push_back(std::stoi(s));
    ccfg.metrics.clear();
    for (const auto& s : split(metrics)) ccfg.metrics.push_back(parse_metric(s));
    ccfg.gamma = real_arg(cgamma);
    ccfg.beta = real_arg(cbeta);
    ccfg.reference = !no_reference;
    const auto report = harness::run_convergence(ccfg);
    emit(report.to_json(), out);
    if (!report.all_passed()) status = 1;
  });

  // verify
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  std::string scopes;
  std::uint64_t vseed = 1;
  verify->add_option("--scope", scopes, "comma list of scopes (default: all)");
  verify->add_option("--seed", vseed, "master seed");
  verify->add_option("--out", out, "report path (stdout if omitted)");
  verify->callback([&] {
    const auto list = scopes.empty() ? harness::kVerificationScopes : split(scopes);
    const auto report = harness::run_verification_suite(list, vseed);
    emit(report.to_json(), out);
    for (const auto& v : report.verdicts) {
      std::fprintf(stderr, "%s %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str());
    }
    if (!report.all_passed()) status = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return status;
}
