#pragma once

#include <cstdint>
#include <random>

namespace subframe {

/// Reproducible random stream identified by (master_seed, stream_index).
///
/// The pair is mixed through SplitMix64 into four 32-bit-pair words that seed
/// a std::mt19937_64 via std::seed_seq. Identical pairs give identical
/// sequences; distinct stream indices give decorrelated streams. Streams are
/// owned by one task at a time.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_; }
  [[nodiscard]] std::uint64_t stream_index() const noexcept { return index_; }

  /// Child stream for a sub-task, e.g. one Monte-Carlo trial.
  [[nodiscard]] RngStream derive(std::uint64_t child) const;

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)
  bool bernoulli(double p);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer, exposed for stream-index derivation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Combines a (size_index, trial_index) style pair into one stream index.
std::uint64_t combine_stream(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace subframe
