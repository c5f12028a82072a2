#include "subframe/limits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace subframe {

std::string_view to_string(LawFamily family) { return family == LawFamily::mp ? "mp" : "manova"; }

LawFamily parse_law_family(std::string_view name) {
  if (name == "mp") return LawFamily::mp;
  if (name == "manova") return LawFamily::manova;
  throw Error("unknown law family '" + std::string(name) + "'");
}

LimitLaw LimitLaw::manova(double gamma, double beta) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("manova law: need 0 < gamma < 1");
  if (!(beta > 0.0)) throw Error("manova law: need beta > 0");
  double p = beta * gamma;
  if (p > 1.0 + 1e-12) throw Error("manova law: need p = beta * gamma <= 1");
  p = std::min(p, 1.0);
  LimitLaw law;
  law.family_ = LawFamily::manova;
  law.gamma_ = gamma;
  law.beta_ = beta;
  law.p_ = p;
  const double a = std::sqrt(beta * (1.0 - gamma));
  const double b = std::sqrt(std::max(0.0, 1.0 - p));
  law.lambda_plus_ = (a + b) * (a + b);
  // (a - b)^2 rewritten without cancellation.
  law.lambda_minus_ = law.lambda_plus_ > 0.0 ? (beta - 1.0) * (beta - 1.0) / law.lambda_plus_ : 0.0;
  law.atom_location_ = 1.0 / gamma;
  law.atom_mass_ = std::max(0.0, 1.0 + 1.0 / beta - 1.0 / (beta * gamma));
  law.zero_atom_mass_ = std::max(0.0, 1.0 - 1.0 / beta);
  law.build_table();
  return law;
}

LimitLaw LimitLaw::mp(double beta) {
  if (!(beta > 0.0)) throw Error("mp law: need beta > 0");
  LimitLaw law;
  law.family_ = LawFamily::mp;
  law.beta_ = beta;
  law.lambda_plus_ = (1.0 + std::sqrt(beta)) * (1.0 + std::sqrt(beta));
  law.lambda_minus_ = (1.0 - beta) * (1.0 - beta) / law.lambda_plus_;
  law.atom_location_ = std::numeric_limits<double>::quiet_NaN();
  law.zero_atom_mass_ = std::max(0.0, 1.0 - 1.0 / beta);
  law.build_table();
  return law;
}

namespace {

double width(LawFamily family, double gamma, double beta, double p) {
  if (family == LawFamily::mp) return 4.0 * std::sqrt(beta);
  return 4.0 * std::sqrt(beta * (1.0 - gamma)) * std::sqrt(std::max(0.0, 1.0 - p));
}

}  // namespace

double LimitLaw::density(double x) const {
  if (!(x > lambda_minus_ && x < lambda_plus_)) return 0.0;
  const double root = std::sqrt((lambda_plus_ - x) * (x - lambda_minus_));
  if (family_ == LawFamily::mp) return root / (2.0 * M_PI * beta_ * x);
  return root / (2.0 * beta_ * M_PI * x * (1.0 - gamma_ * x));
}

double LimitLaw::x_of_theta(double theta) const {
  const double s = std::sin(theta);
  return lambda_minus_ + width(family_, gamma_, beta_, p_) * s * s;
}

double LimitLaw::angular_weight(double theta) const {
  const double w = width(family_, gamma_, beta_, p_);
  if (!(w > 0.0)) return 0.0;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double x = lambda_minus_ + w * s * s;
  // s^2 / x, with its limit 1/w when lambda_- = 0.
  const double s2_over_x = lambda_minus_ == 0.0 ? 1.0 / w : s * s / x;
  if (family_ == LawFamily::mp) return w * w * c * c * s2_over_x / (M_PI * beta_);
  // Gap between the upper edge and 1/gamma, written without cancellation.
  const double xr = 1.0 / gamma_ - 1.0;
  const double gap = (xr - beta_) * (xr - beta_) / (1.0 / gamma_ - lambda_minus_);
  const double c2_ratio = gap == 0.0 ? 1.0 / w : c * c / (gap + w * c * c);
  return w * w * s2_over_x * c2_ratio / (beta_ * M_PI * gamma_);
}

void LimitLaw::build_table() {
  const int points = limits::kCdfGridPoints;
  table_.assign(static_cast<std::size_t>(points), 0.0);
  if (!(width(family_, gamma_, beta_, p_) > 0.0)) return;
  const double h = (M_PI / 2.0) / (points - 1);
  constexpr int kPanels = 16;
  numerics::CompensatedSum acc;
  for (int i = 1; i < points; ++i) {
    const double a = (i - 1) * h;
    const double step = h / kPanels;
    double sum = angular_weight(a) + angular_weight(a + h);
    for (int k = 1; k < kPanels; ++k) sum += (k % 2 == 1 ? 4.0 : 2.0) * angular_weight(a + k * step);
    acc.add(sum * step / 3.0);
    table_[static_cast<std::size_t>(i)] = acc.value();
  }
}

double LimitLaw::continuous_cdf(double x) const {
  const double w = width(family_, gamma_, beta_, p_);
  if (!(w > 0.0) || x <= lambda_minus_) return 0.0;
  if (x >= lambda_plus_) return table_.back();
  const double theta = std::asin(std::sqrt(std::clamp((x - lambda_minus_) / w, 0.0, 1.0)));
  const int points = limits::kCdfGridPoints;
  const double h = (M_PI / 2.0) / (points - 1);
  const int j = std::min(points - 2, static_cast<int>(theta / h));
  const double t = (theta - j * h) / h;
  const double c0 = table_[static_cast<std::size_t>(j)];
  const double c1 = table_[static_cast<std::size_t>(j + 1)];
  const double d0 = angular_weight(j * h) * h;
  const double d1 = angular_weight((j + 1) * h) * h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * c0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * c1 +
                   (t3 - t2) * d1;
  return std::clamp(v, c0, c1);
}

double LimitLaw::cdf(double x) const {
  double v = continuous_cdf(x);
  if (x >= 0.0) v += zero_atom_mass_;
  if (family_ == LawFamily::manova && x >= atom_location_) v += atom_mass_;
  return v;
}

double LimitLaw::cdf_left(double x) const {
  double v = continuous_cdf(x);
  if (x > 0.0) v += zero_atom_mass_;
  if (family_ == LawFamily::manova && x > atom_location_) v += atom_mass_;
  return v;
}

double LimitLaw::cdf_direct(double x, double abs_tol) const {
  double v = 0.0;
  const double w = width(family_, gamma_, beta_, p_);
  if (w > 0.0 && x > lambda_minus_) {
    const double theta =
        std::asin(std::sqrt(std::clamp((x - lambda_minus_) / w, 0.0, 1.0)));
    if (theta > 0.0) {
      v = numerics::simpson([this](double t) { return angular_weight(t); }, 0.0, theta, abs_tol);
    }
  }
  if (x >= 0.0) v += zero_atom_mass_;
  if (family_ == LawFamily::manova && x >= atom_location_) v += atom_mass_;
  return v;
}

double LimitLaw::integrate_continuous(const std::function<double(double)>& g,
                                      double abs_tol) const {
  if (!(width(family_, gamma_, beta_, p_) > 0.0)) return 0.0;
  if (lambda_minus_ > 0.0) {
    return numerics::simpson(
        [&](double t) { return g(x_of_theta(t)) * angular_weight(t); }, 0.0, M_PI / 2.0, abs_tol);
  }
  // theta = (pi/2) u^2 smooths integrands with a log or power singularity at zero.
  return numerics::simpson(
      [&](double u) {
        const double t = M_PI / 2.0 * u * u;
        return g(x_of_theta(t)) * angular_weight(t) * M_PI * u;
      },
      0.0, 1.0, abs_tol);
}

double LimitLaw::moment(int r) const {
  if (family_ == LawFamily::mp) return limits::mp_moment(beta_, r);
  return limits::manova_moment(gamma_, p_, r);
}

double LimitLaw::raw_moment(int r) const {
  if (family_ == LawFamily::mp) return limits::mp_moment(beta_, r);
  return limits::manova_moment(gamma_, p_, r) / p_;
}

double LimitLaw::quadrature_moment(int r, double abs_tol) const {
  if (r < 0) throw Error("quadrature_moment: r must be nonnegative");
  double v = integrate_continuous([r](double x) { return std::pow(x, r); }, abs_tol);
  if (family_ == LawFamily::manova) v += atom_mass_ * std::pow(atom_location_, r);
  if (r == 0) v += zero_atom_mass_;
  return v;
}

namespace limits {

namespace {

BigInt binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

template <class T>
T power(const T& base, int e) {
  T out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

template <class T>
T manova_moment_impl(const T& gamma, const T& p, int r) {
  if (r < 1) throw Error("moment order must be >= 1");
  const T x = T(1) / gamma - T(1);
  const T xp1 = x + T(1);
  T out = p * power(xp1, r - 1);
  for (int j = 0; j <= r - 2; ++j) {
    T inner = 0;
    for (int i = 1; i <= j + 1; ++i) {
      inner += T(narayana(j + 1, i)) * power(T(x * p), i) * power(T(T(1) - p), 2 + j - i);
    }
    out -= power(xp1, r - 2 - j) * inner;
  }
  return out;
}

template <class T>
T mp_moment_impl(const T& beta, int r) {
  if (r < 1) throw Error("moment order must be >= 1");
  T out = 0;
  for (int i = 1; i <= r; ++i) out += T(narayana(r, i)) * power(beta, i - 1);
  return out;
}

}  // namespace

BigInt narayana(int j, int i) {
  if (j < 1 || i < 1 || i > j) return 0;
  return binom(j, i) * binom(j, i - 1) / j;
}

BigInt catalan(int j) {
  if (j < 0) throw Error("catalan: negative index");
  return binom(2 * j, j) / (j + 1);
}

NarayanaTable narayana_table(int max_order) {
  if (max_order < 1) throw Error("narayana_table: max_order must be >= 1");
  NarayanaTable t;
  t.max_order = max_order;
  t.entries.resize(static_cast<std::size_t>(max_order) + 1);
  for (int j = 1; j <= max_order; ++j) {
    auto& row = t.entries[static_cast<std::size_t>(j)];
    row.assign(static_cast<std::size_t>(j) + 1, Rational(0));
    for (int i = 1; i <= j; ++i) row[static_cast<std::size_t>(i)] = Rational(narayana(j, i));
  }
  return t;
}

Rational manova_moment_exact(const Rational& gamma, const Rational& p, int r) {
  if (!(gamma > 0 && gamma < 1)) throw Error("manova moment: need 0 < gamma < 1");
  if (p < 0 || p > 1) throw Error("manova moment: need 0 <= p <= 1");
  if (r < 1) throw Error("moment order must be >= 1");
  return manova_moment_impl<Rational>(gamma, p, r);
}

double manova_moment(double gamma, double p, int r) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("manova moment: need 0 < gamma < 1");
  if (r < 1) throw Error("moment order must be >= 1");
  return manova_moment_impl<double>(gamma, p, r);
}

Rational mp_moment_exact(const Rational& beta, int r) { return mp_moment_impl<Rational>(beta, r); }

double mp_moment(double beta, int r) { return mp_moment_impl<double>(beta, r); }

LawFunctional functional_integral(const LimitLaw& law, FunctionalKind kind, double abs_tol,
                                  const std::function<double(double)>& g, double log_base) {
  LawFunctional out;
  out.log_base = log_base;
  const bool has_main_atom = law.family() == LawFamily::manova && law.atom_mass() > 0.0;
  switch (kind) {
    case FunctionalKind::generic: {
      if (!g) throw Error("functional_integral: generic kind needs an integrand");
      out.value = law.integrate_continuous(g, abs_tol);
      if (has_main_atom) out.value += law.atom_mass() * g(law.atom_location());
      if (law.zero_atom_mass() > 0.0) out.value += law.zero_atom_mass() * g(0.0);
      return out;
    }
    case FunctionalKind::mse: {
      const bool touches_zero = law.lambda_minus() == 0.0 && law.lambda_plus() > 0.0;
      if (touches_zero || law.zero_atom_mass() > 0.0) {
        out.infinite = 1;
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      double inv = law.integrate_continuous([](double x) { return 1.0 / x; }, abs_tol);
      if (has_main_atom) inv += law.atom_mass() / law.atom_location();
      out.value = law.raw_moment(1) * inv;
      return out;
    }
    case FunctionalKind::shannon: {
      if (law.beta() < 1.0) {
        out.infinite = -1;
        out.value = -std::numeric_limits<double>::infinity();
        return out;
      }
      const double nonzero = 1.0 - law.zero_atom_mass();
      double logs = law.integrate_continuous([](double x) { return std::log(x); }, abs_tol);
      if (has_main_atom) logs += law.atom_mass() * std::log(law.atom_location());
      const double arith = law.raw_moment(1) / nonzero;
      out.value = (logs / nonzero - std::log(arith)) / std::log(log_base);
      return out;
    }
  }
  return out;
}

void write_law_csv(const LimitLaw& law, const std::filesystem::path& path, int points) {
  if (points < 2) throw Error("write_law_csv: need at least 2 points");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "# family=" << to_string(law.family()) << '\n';
  if (law.family() == LawFamily::manova) out << "# gamma=" << law.gamma() << '\n';
  out << "# beta=" << law.beta() << '\n'
      << "# lambda_minus=" << law.lambda_minus() << '\n'
      << "# lambda_plus=" << law.lambda_plus() << '\n';
  if (law.family() == LawFamily::manova) {
    out << "# atom_location=" << law.atom_location() << '\n'
        << "# atom_mass=" << law.atom_mass() << '\n';
  }
  out << "# zero_atom_mass=" << law.zero_atom_mass() << '\n';
  out << "x,density,cdf\n";
  const double lo = std::min(0.0, law.lambda_minus());
  double hi = law.lambda_plus();
  if (law.family() == LawFamily::manova) hi = std::max(hi, law.atom_location());
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    out << x << ',' << law.density(x) << ',' << law.cdf(x) << '\n';
  }
}

}  // namespace limits
}  // namespace subframe
