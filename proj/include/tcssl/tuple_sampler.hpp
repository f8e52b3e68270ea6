#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tcssl/rng.hpp"

namespace tcssl {

struct SamplerConfig {
  double delta_seconds = 30.0;
  double gamma_seconds = 120.0;
  double frames_per_second = 5.0;
  std::size_t tuples_per_video = 250;

  /// round(delta * fps)
  std::int64_t delta_frames() const;
  /// round(gamma * fps)
  std::int64_t gamma_frames() const;

  void validate() const;
};

enum class TupleOrder { first, second };

/// Anchor frame t with offsets: first order yields (t, t+delta, t+gamma),
/// second order (t, t+delta, t+2*delta, t+gamma).
struct SampledTuple {
  TupleOrder order = TupleOrder::first;
  std::int64_t anchor = 0;
  std::int64_t delta = 0;
  std::int64_t gamma = 0;

  std::size_t size() const { return order == TupleOrder::first ? 3 : 4; }
  std::array<std::int64_t, 4> indices() const;

  bool operator==(const SampledTuple&) const = default;
};

/// Number of anchors in [0, T-1] that admit at least one distant partner.
std::int64_t feasible_anchor_count(std::int64_t frames, std::int64_t gamma_frames);

SampledTuple sample_first_order(std::int64_t frames, const SamplerConfig& cfg, Rng& rng);
SampledTuple sample_second_order(std::int64_t frames, const SamplerConfig& cfg, Rng& rng);
SampledTuple sample_tuple(TupleOrder order, std::int64_t frames, const SamplerConfig& cfg, Rng& rng);

struct ScheduledTuple {
  std::size_t video = 0;
  SampledTuple tuple;

  bool operator==(const ScheduledTuple&) const = default;
};

/// Draws cfg.tuples_per_video tuples for every video from per-video streams
/// and shuffles the combined list.
std::vector<ScheduledTuple> build_epoch_schedule(std::span<const std::int64_t> video_lengths,
                                                 const SamplerConfig& cfg, TupleOrder order, Rng& rng);

}  // namespace tcssl
