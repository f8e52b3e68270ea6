#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace tcssl {

/// Seeded random stream. The engine is std::mt19937_64; every distribution
/// is implemented here so that streams are identical across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi]; unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform in the open interval (0, 1).
  double uniform_open();

  /// Uniform in the open interval (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  bool bernoulli(double p) { return uniform_open() < p; }

  /// Standard normal via Box-Muller.
  double normal();

  /// Independent stream identified by (seed, stream_id).
  Rng derive(std::uint64_t stream_id) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace tcssl
