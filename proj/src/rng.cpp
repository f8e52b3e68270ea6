#include "tcssl/rng.hpp"

#include <cmath>
#include <numbers>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019ull));
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ContractError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo);
  if (span == ~0ull) return lo + static_cast<std::int64_t>(engine_());
  const std::uint64_t n = span + 1;
  // Largest multiple of n representable; reject draws above it.
  const std::uint64_t limit = ~0ull - (~0ull % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return lo + static_cast<std::int64_t>(x % n);
}

double Rng::uniform_open() {
  const std::uint64_t k = engine_() >> 11;  // 53 bits
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::derive(std::uint64_t stream_id) const { return Rng(mix_seed(seed_, stream_id)); }

}  // namespace tcssl
