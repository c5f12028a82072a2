#include "subframe/subsets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace subframe {

SelectionModel SelectionModel::combinatorial(int k) {
  SelectionModel m;
  m.mode = Mode::combinatorial;
  m.k = k;
  return m;
}

SelectionModel SelectionModel::bernoulli(double p) {
  SelectionModel m;
  m.mode = Mode::bernoulli;
  m.p = p;
  m.k = 0;
  return m;
}

void SelectionModel::validate(int n) const {
  if (mode == Mode::combinatorial) {
    if (k < 1 || k > n) {
      throw Error("selection: need 1 <= k <= n, got k=" + std::to_string(k) +
                  " n=" + std::to_string(n));
    }
  } else if (!(p >= 0.0 && p <= 1.0)) {
    throw Error("selection: need 0 <= p <= 1");
  }
}

SelectionModel parse_selection(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error("selection must be comb:<k> or bern:<p>");
  const std::string_view kind = text.substr(0, colon);
  const std::string_view value = text.substr(colon + 1);
  if (kind == "comb") {
    const Rational k = numerics::parse_rational(value);
    if (denominator(k) != 1) throw Error("comb:<k> needs an integer k");
    return SelectionModel::combinatorial(static_cast<int>(numerator(k)));
  }
  if (kind == "bern") return SelectionModel::bernoulli(numerics::to_double(numerics::parse_rational(value)));
  throw Error("selection must be comb:<k> or bern:<p>");
}

std::string to_string(const SelectionModel& model) {
  if (model.mode == SelectionModel::Mode::combinatorial) return "comb:" + std::to_string(model.k);
  std::ostringstream os;
  os.precision(17);
  os << "bern:" << model.p;
  return os.str();
}

SelectionMask::SelectionMask(int n, std::vector<int> indices) : n_(n), indices_(std::move(indices)) {
  if (n_ < 0) throw Error("selection mask: n must be nonnegative");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= n_) throw Error("selection mask: index out of range");
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw Error("selection mask: indices must be strictly increasing");
    }
  }
}

SelectionMask SelectionMask::full(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return SelectionMask(n, std::move(idx));
}

namespace subsets {

SelectionMask draw(const SelectionModel& model, int n, RngStream& rng) {
  model.validate(n);
  std::vector<int> chosen;
  if (model.mode == SelectionModel::Mode::combinatorial) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < model.k; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    chosen.assign(idx.begin(), idx.begin() + model.k);
    std::sort(chosen.begin(), chosen.end());
  } else {
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(model.p)) chosen.push_back(i);
    }
  }
  return SelectionMask(n, std::move(chosen));
}

ComplexMatrix columns(const Frame& f, const SelectionMask& s) {
  if (s.n() != f.n()) throw Error("selection mask size does not match the frame");
  ComplexMatrix out(f.m(), s.size());
  for (int j = 0; j < s.size(); ++j) out.col(j) = f.matrix().col(s.indices()[static_cast<std::size_t>(j)]);
  return out;
}

SubframeMatrices subframe_gram(const Frame& f, const SelectionMask& s) {
  SubframeMatrices out;
  const ComplexMatrix fs = columns(f, s);
  out.empty = s.empty();
  out.gram = fs.adjoint() * fs;
  out.hessian = s.empty() ? ComplexMatrix::Zero(f.m(), f.m()) : ComplexMatrix(fs * fs.adjoint());
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return std::round(out);
}

void check_enumeration_cap(const SelectionModel& model, int n) {
  model.validate(n);
  if (model.mode == SelectionModel::Mode::bernoulli) {
    if (n > kMaxBernoulliN) {
      throw Error("exact bernoulli enumeration is capped at n <= " + std::to_string(kMaxBernoulliN));
    }
  } else if (binomial(n, model.k) > kMaxCombinations) {
    throw Error("exact combinatorial enumeration is capped at C(n,k) <= 1e6");
  }
}

namespace {

std::vector<double> size_weights(int n, double p) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (int c = 0; c <= n; ++c) w[static_cast<std::size_t>(c)] = std::pow(p, c) * std::pow(1.0 - p, n - c);
  return w;
}

std::vector<int> bits_of(std::uint64_t mask, int n) {
  std::vector<int> idx;
  for (int b = 0; b < n; ++b) {
    if ((mask >> b) & 1U) idx.push_back(b);
  }
  return idx;
}

bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++c[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

/// Weighted first and second moments about a fixed shift.
struct ShiftedMoments {
  double shift = 0.0;
  numerics::CompensatedSum w;
  numerics::CompensatedSum s1;
  numerics::CompensatedSum s2;

  void add(double weight, double value) {
    const double d = value - shift;
    w.add(weight);
    s1.add(weight * d);
    s2.add(weight * d * d);
  }
  void merge(const ShiftedMoments& o) {
    w.merge(o.w);
    s1.merge(o.s1);
    s2.merge(o.s2);
  }
  [[nodiscard]] double mean() const { return shift + s1.value() / w.value(); }
  [[nodiscard]] double variance() const {
    const double m1 = s1.value() / w.value();
    return std::max(0.0, s2.value() / w.value() - m1 * m1);
  }
};

/// (1/n) tr(H^r) for r = 1..r_max.
void trace_powers(const ComplexMatrix& h, int r_max, double n, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(r_max));
  ComplexMatrix power = h;
  for (int r = 1; r <= r_max; ++r) {
    if (r > 1) power = power * h;
    out[static_cast<std::size_t>(r - 1)] = power.trace().real() / n;
  }
}

}  // namespace

void for_each_mask(const SelectionModel& model, int n,
                   const std::function<void(const SelectionMask&, double)>& visit) {
  check_enumeration_cap(model, n);
  if (model.mode == SelectionModel::Mode::bernoulli) {
    const auto w = size_weights(n, model.p);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t i = 0; i < total; ++i) {
      const std::uint64_t g = i ^ (i >> 1);
      visit(SelectionMask(n, bits_of(g, n)), w[static_cast<std::size_t>(std::popcount(g))]);
    }
    return;
  }
  const double weight = 1.0 / binomial(n, model.k);
  std::vector<int> c(static_cast<std::size_t>(model.k));
  std::iota(c.begin(), c.end(), 0);
  do {
    visit(SelectionMask(n, c), weight);
  } while (next_combination(c, n));
}

ExactResult exact_expectation(int n, const SelectionModel& model, const SubsetStatistic& stat) {
  ShiftedMoments acc;
  bool first = true;
  std::size_t count = 0;
  for_each_mask(model, n, [&](const SelectionMask& s, double weight) {
    const double v = stat(s);
    if (first) {
      acc.shift = std::isfinite(v) ? v : 0.0;
      first = false;
    }
    acc.add(weight, v);
    ++count;
  });
  return {acc.mean(), acc.variance(), count};
}

SubsetStatistic trace_moment_statistic(const Frame& f, int r) {
  if (r < 1) throw Error("trace moment order must be >= 1");
  return [&f, r](const SelectionMask& s) {
    if (s.empty()) return 0.0;
    const ComplexMatrix h = subframe_gram(f, s).hessian;
    std::vector<double> t;
    trace_powers(h, r, f.n(), t);
    return t.back();
  };
}

MomentEnumeration exact_moments(const Frame& f, const SelectionModel& model, int r_max) {
  if (r_max < 1) throw Error("exact_moments: r_max must be >= 1");
  const int n = f.n();
  const int m = f.m();
  check_enumeration_cap(model, n);
  const ComplexMatrix& fm = f.matrix();
  const auto rs = static_cast<std::size_t>(r_max);

  // Shift each moment by its value at the averaged Hessian to limit cancellation.
  const double scale = model.mode == SelectionModel::Mode::bernoulli
                           ? model.p
                           : static_cast<double>(model.k) / n;
  std::vector<double> shift;
  trace_powers(scale * (fm * fm.adjoint()), r_max, n, shift);

  auto fresh = [&]() {
    std::vector<ShiftedMoments> acc(rs);
    for (std::size_t r = 0; r < rs; ++r) acc[r].shift = shift[r];
    return acc;
  };

  MomentEnumeration out;
  std::vector<ShiftedMoments> total = fresh();

  if (model.mode == SelectionModel::Mode::bernoulli) {
    const auto w = size_weights(n, model.p);
    const std::uint64_t masks = std::uint64_t{1} << n;
    const std::uint64_t chunks = std::min<std::uint64_t>(masks, 256);
    const std::uint64_t per_chunk = masks / chunks;
    constexpr std::uint64_t kRefresh = 4096;
    std::vector<std::vector<ShiftedMoments>> partial(chunks);

    numerics::parallel_chunks(chunks, [&](std::size_t c) {
      std::vector<ShiftedMoments> acc = fresh();
      std::vector<double> t;
      const std::uint64_t begin = c * per_chunk;
      const std::uint64_t end = begin + per_chunk;
      auto rebuild = [&](std::uint64_t g) {
        ComplexMatrix h = ComplexMatrix::Zero(m, m);
        for (int b = 0; b < n; ++b) {
          if ((g >> b) & 1U) h.noalias() += fm.col(b) * fm.col(b).adjoint();
        }
        return h;
      };
      std::uint64_t g = begin ^ (begin >> 1);
      ComplexMatrix h = rebuild(g);
      for (std::uint64_t i = begin; i < end; ++i) {
        if (i != begin) {
          const int bit = std::countr_zero(i);
          g ^= std::uint64_t{1} << bit;
          if ((i - begin) % kRefresh == 0) {
            h = rebuild(g);
          } else if ((g >> bit) & 1U) {
            h.noalias() += fm.col(bit) * fm.col(bit).adjoint();
          } else {
            h.noalias() -= fm.col(bit) * fm.col(bit).adjoint();
          }
        }
        const double weight = w[static_cast<std::size_t>(std::popcount(g))];
        if (g == 0) {
          t.assign(rs, 0.0);
        } else {
          trace_powers(h, r_max, n, t);
        }
        for (std::size_t r = 0; r < rs; ++r) acc[r].add(weight, t[r]);
      }
      partial[c] = std::move(acc);
    });
    for (const auto& acc : partial) {
      for (std::size_t r = 0; r < rs; ++r) total[r].merge(acc[r]);
    }
    out.count = masks;
  } else {
    const double weight = 1.0 / binomial(n, model.k);
    std::vector<int> c(static_cast<std::size_t>(model.k));
    std::iota(c.begin(), c.end(), 0);
    std::vector<double> t;
    do {
      ComplexMatrix h = ComplexMatrix::Zero(m, m);
      for (const int j : c) h.noalias() += fm.col(j) * fm.col(j).adjoint();
      trace_powers(h, r_max, n, t);
      for (std::size_t r = 0; r < rs; ++r) total[r].add(weight, t[r]);
      ++out.count;
    } while (next_combination(c, n));
  }

  for (std::size_t r = 0; r < rs; ++r) {
    out.mean.push_back(total[r].mean());
    out.variance.push_back(total[r].variance());
  }
  return out;
}

nlohmann::json mask_to_json(const SelectionMask& s) { return s.indices(); }

SelectionMask mask_from_json(const nlohmann::json& j, int n) {
  if (!j.is_array()) throw Error("mask JSON must be an integer array");
  return SelectionMask(n, j.get<std::vector<int>>());
}

}  // namespace subsets
}  // namespace subframe
