#include "subframe/moments.hpp"

#include <algorithm>
#include <functional>
#include <mutex>

#include "subframe/limits.hpp"

namespace subframe {

MomentContext::MomentContext(Rational gamma_in, Rational p_in, std::optional<int> n_in)
    : gamma(std::move(gamma_in)), p(std::move(p_in)), n(n_in) {
  if (!(gamma > 0 && gamma < 1)) throw Error("moment context: need 0 < gamma < 1");
  if (p < 0 || p > 1) throw Error("moment context: need 0 <= p <= 1");
  x = Rational(1) / gamma - 1;
  if (n) {
    if (*n < 2) throw Error("moment context: need n >= 2");
    const Rational m = gamma * *n;
    if (denominator(m) != 1) {
      throw Error("moment context: gamma * n must be an integer dimension m");
    }
  }
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  const BigInt rn = boost::multiprecision::sqrt(num);
  const BigInt rd = boost::multiprecision::sqrt(den);
  if (rn * rn != num || rd * rd != den) return std::nullopt;
  return Rational(rn, rd);
}

Surd::Surd(Rational u, Rational v, Rational d) : u_(std::move(u)), v_(std::move(v)), d_(std::move(d)) {
  if (d_ < 0) throw Error("surd: negative radicand");
  if (v_ != 0) {
    if (auto root = rational_sqrt(d_)) {
      u_ += v_ * *root;
      v_ = 0;
    }
  }
}

double Surd::to_double() const {
  return numerics::to_double(u_) + numerics::to_double(v_) * std::sqrt(numerics::to_double(d_));
}

namespace {

Rational common_radicand(const Surd& a, const Surd& b) {
  if (a.d() == b.d()) return a.d();
  if (a.v() == 0) return b.d();
  if (b.v() == 0) return a.d();
  throw Error("surd: mixing different quadratic fields");
}

}  // namespace

Surd& Surd::operator+=(const Surd& o) {
  d_ = common_radicand(*this, o);
  u_ += o.u_;
  v_ += o.v_;
  return *this;
}

Surd operator*(const Surd& a, const Surd& b) {
  const Rational d = common_radicand(a, b);
  return Surd(a.u_ * b.u_ + a.v_ * b.v_ * d, a.u_ * b.v_ + a.v_ * b.u_, d);
}

Surd operator*(const Surd& a, const Rational& c) { return Surd(a.u_ * c, a.v_ * c, a.d_); }

Surd SurdPolynomial::evaluate(const Rational& p) const {
  Surd out;
  Rational power = 1;
  for (const Surd& c : coeffs) {
    out += c * power;
    power *= p;
  }
  return out;
}

Rational RationalPolynomial::evaluate(const Rational& p) const {
  Rational out = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) out = out * p + *it;
  return out;
}

const Surd& ASequence::at(int s) const {
  if (s < 1 || s > max_s()) throw Error("A-sequence: index " + std::to_string(s) + " not computed");
  return values[static_cast<std::size_t>(s - 1)];
}

namespace moments {

namespace {

Rational rpow(const Rational& b, int e) {
  Rational out = 1;
  for (int i = 0; i < e; ++i) out *= b;
  return out;
}

BigInt binom(int n, int k) {
  BigInt out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

int require_n(const MomentContext& ctx) {
  if (!ctx.n) throw Error("this moment formula needs the frame size n");
  return *ctx.n;
}

void check_cap(int r, int cap) {
  if (cap > kHardPartitionCap) {
    throw Error("partition cap cannot exceed " + std::to_string(kHardPartitionCap));
  }
  if (r < 1 || r > cap) {
    throw Error("partition order r=" + std::to_string(r) + " outside 1.." + std::to_string(cap));
  }
}

/// Restricted-growth strings of length r; visit(block_of, blocks).
void for_each_rgs(int r, const std::function<void(const std::vector<int>&, int)>& visit) {
  std::vector<int> a(static_cast<std::size_t>(r), 0);
  std::function<void(int, int)> rec = [&](int pos, int blocks) {
    if (pos == r) {
      visit(a, blocks);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      a[static_cast<std::size_t>(pos)] = b;
      rec(pos + 1, std::max(blocks, b + 1));
    }
  };
  rec(1, 1);
}

/// Biconnected components of the block multigraph; returns each component's edge count.
std::vector<int> cactus_cycles(int t, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(t));
  std::vector<int> lengths;
  for (int id = 0; id < static_cast<int>(edges.size()); ++id) {
    const auto [u, v] = edges[static_cast<std::size_t>(id)];
    if (u == v) {
      lengths.push_back(1);
      continue;
    }
    adj[static_cast<std::size_t>(u)].emplace_back(id, v);
    adj[static_cast<std::size_t>(v)].emplace_back(id, u);
  }
  std::vector<int> disc(static_cast<std::size_t>(t), -1);
  std::vector<int> low(static_cast<std::size_t>(t), 0);
  std::vector<int> stack;
  int timer = 0;

  auto close_component = [&](int until) {
    std::vector<int> vertices;
    int count = 0;
    while (true) {
      const int id = stack.back();
      stack.pop_back();
      ++count;
      vertices.push_back(edges[static_cast<std::size_t>(id)].first);
      vertices.push_back(edges[static_cast<std::size_t>(id)].second);
      if (id == until) break;
    }
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    if (static_cast<int>(vertices.size()) != count) {
      throw Error("cycle decomposition: component is not a simple cycle");
    }
    lengths.push_back(count);
  };

  std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
    disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
    for (const auto& [id, w] : adj[static_cast<std::size_t>(u)]) {
      if (id == parent_edge) continue;
      auto& lu = low[static_cast<std::size_t>(u)];
      if (disc[static_cast<std::size_t>(w)] == -1) {
        stack.push_back(id);
        dfs(w, id);
        lu = std::min(lu, low[static_cast<std::size_t>(w)]);
        if (low[static_cast<std::size_t>(w)] >= disc[static_cast<std::size_t>(u)]) close_component(id);
      } else if (disc[static_cast<std::size_t>(w)] < disc[static_cast<std::size_t>(u)]) {
        stack.push_back(id);
        lu = std::min(lu, disc[static_cast<std::size_t>(w)]);
      }
    }
  };
  for (int v = 0; v < t; ++v) {
    if (disc[static_cast<std::size_t>(v)] == -1) dfs(v, -1);
  }
  return lengths;
}

CycleProfile classify_rgs(const std::vector<int>& block_of, int t) {
  const int r = static_cast<int>(block_of.size());
  std::vector<int> first(static_cast<std::size_t>(t), r);
  std::vector<int> last(static_cast<std::size_t>(t), -1);
  std::vector<int> prev(static_cast<std::size_t>(t), -1);
  CycleProfile out;
  for (int i = 0; i < r; ++i) {
    const auto b = static_cast<std::size_t>(block_of[static_cast<std::size_t>(i)]);
    first[b] = std::min(first[b], i);
    last[b] = i;
  }
  // Between consecutive elements a < a' of a block, every other block that
  // appears must lie entirely inside (a, a').
  for (int i = 0; i < r; ++i) {
    const auto b = static_cast<std::size_t>(block_of[static_cast<std::size_t>(i)]);
    const int a = prev[b];
    prev[b] = i;
    if (a < 0) continue;
    for (int c = a + 1; c < i; ++c) {
      const auto cb = static_cast<std::size_t>(block_of[static_cast<std::size_t>(c)]);
      if (first[cb] < a || last[cb] > i) return out;
    }
  }
  out.is_noncrossing = true;
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    edges.emplace_back(block_of[static_cast<std::size_t>(i)],
                       block_of[static_cast<std::size_t>((i + 1) % r)]);
  }
  out.cycle_lengths = cactus_cycles(t, edges);
  std::sort(out.cycle_lengths.rbegin(), out.cycle_lengths.rend());
  return out;
}

Surd sqrt_x_power(const Rational& x, int j) {
  if (j % 2 == 0) return Surd::rational(rpow(x, j / 2), x);
  return Surd(0, rpow(x, (j - 1) / 2), x);
}

}  // namespace

Rational etf_expected_moment(const MomentContext& ctx, int r) {
  if (r < 1 || r > 4) throw Error("etf_expected_moment: r must be in 1..4");
  const int n = require_n(ctx);
  Rational out = limits::manova_moment_exact(ctx.gamma, ctx.p, r);
  if (r == 4) {
    const Rational q = ctx.p * (1 - ctx.p) * ctx.x;
    out += q * q / (n - 1);
  }
  return out;
}

Rational etf_moment_variance(const MomentContext& ctx, int r) {
  if (r < 1 || r > 2) throw Error("etf_moment_variance: r must be 1 or 2");
  const int n = require_n(ctx);
  const Rational& p = ctx.p;
  const Rational& x = ctx.x;
  if (r == 1) return (p - p * p) / n;
  const Rational t2 = Rational(-1) + 4 * x + 2 * x * x / (n - 1);
  const Rational t3 = 4 * x * (Rational(-1) + x * Rational(n - 2, n - 1));
  const Rational t4 = x * x * Rational(6 - 4 * n, n - 1);
  return (p + t2 * rpow(p, 2) + t3 * rpow(p, 3) + t4 * rpow(p, 4)) / n;
}

ASequence a_sequence(const Rational& gamma, int max_s) {
  if (max_s < 2) throw Error("a_sequence: max_s must be >= 2");
  if (!(gamma > 0 && gamma < 1)) throw Error("a_sequence: need 0 < gamma < 1");
  const Rational x = Rational(1) / gamma - 1;
  ASequence a;
  a.gamma = gamma;
  // (2 - 1/gamma) / (2 sqrt(x)) = ((1 - x) / (2x)) sqrt(x)
  a.values.push_back(Surd(0, (1 - x) / (2 * x), x));
  a.values.push_back(Surd::rational(1, x));
  for (int s = 2; s < max_s; ++s) {
    Surd next = Surd::rational(0, x);
    for (int i = 1; i <= s; ++i) next += a.at(i) * a.at(s + 1 - i) * Rational(-1);
    a.values.push_back(next);
  }
  return a;
}

std::vector<Partition> enumerate_partitions(int r, int t, int cap) {
  check_cap(r, cap);
  if (t < 1 || t > r) throw Error("enumerate_partitions: need 1 <= t <= r");
  std::vector<Partition> out;
  for_each_rgs(r, [&](const std::vector<int>& a, int blocks) {
    if (blocks == t) out.push_back(Partition{r, t, a});
  });
  return out;
}

CycleProfile classify(const Partition& pi) {
  if (pi.r < 1 || static_cast<int>(pi.block_of.size()) != pi.r) throw Error("classify: bad partition");
  int expected = 0;
  for (const int b : pi.block_of) {
    if (b < 0 || b > expected) throw Error("classify: not a restricted-growth string");
    if (b == expected) ++expected;
  }
  if (expected != pi.t) throw Error("classify: block count mismatch");
  return classify_rgs(pi.block_of, pi.t);
}

Surd partition_value(const CycleProfile& profile, const ASequence& a) {
  const Rational x = Rational(1) / a.gamma - 1;
  if (!profile.is_noncrossing) return Surd::rational(0, x);
  Surd out = Surd::rational(1, x);
  for (const int s : profile.cycle_lengths) out = out * a.at(s);
  return out;
}

const Census& partition_census(int r, int cap) {
  check_cap(r, cap);
  static std::mutex mutex;
  static std::map<int, Census> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find(r); it != cache.end()) return it->second;
  Census census;
  for_each_rgs(r, [&](const std::vector<int>& a, int blocks) {
    CycleProfile profile = classify_rgs(a, blocks);
    if (profile.is_noncrossing) census[{blocks, std::move(profile.cycle_lengths)}] += 1;
  });
  return cache.emplace(r, std::move(census)).first->second;
}

SurdPolynomial central_moment(const MomentContext& ctx, int r, int cap) {
  const Census& census = partition_census(r, cap);
  const ASequence a = a_sequence(ctx.gamma, std::max(2, r));
  SurdPolynomial poly;
  poly.coeffs.assign(static_cast<std::size_t>(r) + 1, Surd::rational(0, ctx.x));
  for (const auto& [key, count] : census) {
    Surd value = Surd::rational(Rational(count), ctx.x);
    for (const int s : key.second) value = value * a.at(s);
    poly.coeffs[static_cast<std::size_t>(key.first)] += value;
  }
  return poly;
}

RationalPolynomial asymptotic_moment(const MomentContext& ctx, int r, int cap) {
  check_cap(r, cap);
  const Rational half_g = Rational(1) / (2 * ctx.gamma);
  std::vector<Surd> acc(static_cast<std::size_t>(r) + 1, Surd::rational(0, ctx.x));
  acc[1] += Surd::rational(rpow(half_g, r), ctx.x);
  for (int j = 1; j <= r; ++j) {
    const Surd factor = sqrt_x_power(ctx.x, j) * Rational(binom(r, j) * 1) * rpow(half_g, r - j);
    const SurdPolynomial central = central_moment(ctx, j, cap);
    for (std::size_t i = 0; i < central.coeffs.size(); ++i) acc[i] += factor * central.coeffs[i];
  }
  RationalPolynomial out;
  for (const Surd& c : acc) {
    if (c.v() != 0) {
      throw Error("asymptotic_moment: irrational coefficient survived at r=" + std::to_string(r));
    }
    out.coeffs.push_back(c.u());
  }
  return out;
}

std::vector<IdentityVerdict> manova_identity_check(const MomentContext& ctx, int r_max, int cap) {
  check_cap(r_max, cap);
  std::vector<IdentityVerdict> out;
  for (int r = 1; r <= r_max; ++r) {
    IdentityVerdict v;
    v.r = r;
    v.asymptotic = asymptotic_moment(ctx, r, cap).evaluate(ctx.p);
    v.manova = limits::manova_moment_exact(ctx.gamma, ctx.p, r);
    v.equal = v.asymptotic == v.manova;
    out.push_back(std::move(v));
  }
  return out;
}

Rational ewb_bound(const MomentContext& ctx, int r) {
  if (r < 2 || r > 4) throw Error("ewb_bound: r must be in 2..4");
  return etf_expected_moment(ctx, r);
}

EsvEskBounds esv_esk_bounds(const MomentContext& ctx) {
  const Rational& p = ctx.p;
  const Rational& x = ctx.x;
  if (!(p > 0 && p < 1)) throw Error("esv_esk_bounds: need 0 < p < 1");
  EsvEskBounds b;
  b.esv = p + (x - 1) * p * p;
  const Rational num = p + rpow(p, 2) * (6 * x - 4) + rpow(p, 3) * (6 * x * x - 16 * x + 6) +
                       rpow(p, 4) * (x * x * x - 7 * x * x + 11 * x - 3);
  b.esk = num / (b.esv * b.esv);
  return b;
}

}  // namespace moments
}  // namespace subframe
