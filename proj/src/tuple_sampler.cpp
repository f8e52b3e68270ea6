#include "tcssl/tuple_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Anchors are drawn uniformly from the frames that have a valid distant
// partner: [0, T-1-gamma] and [gamma, T-1]. When T >= 2*gamma this is every frame.
std::int64_t draw_anchor(std::int64_t frames, std::int64_t gamma, Rng& rng) {
  const std::int64_t low_end = frames - 1 - gamma;  // last anchor with a forward partner
  const std::int64_t high_begin = gamma;            // first anchor with a backward partner
  if (low_end < 0) throw NoValidDistantFrame("T-1 < gamma frames: no distant frame exists");
  if (high_begin <= low_end + 1) return rng.uniform_int(0, frames - 1);
  const std::int64_t low_count = low_end + 1;
  const std::int64_t high_count = frames - high_begin;
  const std::int64_t k = rng.uniform_int(0, low_count + high_count - 1);
  return k < low_count ? k : high_begin + (k - low_count);
}

// Uniform over the offsets that keep every derived index inside the video,
// which is the limiting distribution of re-drawing an offending offset.
std::int64_t draw_delta(std::int64_t frames, std::int64_t t, std::int64_t delta_max, TupleOrder order, Rng& rng) {
  std::int64_t lo = std::max(-delta_max, -t);
  std::int64_t hi = std::min(delta_max, frames - 1 - t);
  if (order == TupleOrder::second) {
    lo = std::max(lo, ceil_div(-t, 2));
    hi = std::min(hi, floor_div(frames - 1 - t, 2));
  }
  if (lo > hi) throw ResampleExhausted("no valid near offset for anchor " + std::to_string(t));
  return rng.uniform_int(lo, hi);
}

std::int64_t draw_gamma(std::int64_t frames, std::int64_t t, std::int64_t gamma_min, Rng& rng) {
  // Valid set: [-t, -gamma_min] U [gamma_min, T-1-t].
  const std::int64_t back = std::max<std::int64_t>(0, t - gamma_min + 1);
  const std::int64_t fwd = std::max<std::int64_t>(0, frames - 1 - t - gamma_min + 1);
  if (back + fwd == 0) throw ResampleExhausted("no valid distant offset for anchor " + std::to_string(t));
  const std::int64_t k = rng.uniform_int(0, back + fwd - 1);
  return k < back ? -t + k : gamma_min + (k - back);
}

}  // namespace

std::int64_t SamplerConfig::delta_frames() const {
  return static_cast<std::int64_t>(std::llround(delta_seconds * frames_per_second));
}

std::int64_t SamplerConfig::gamma_frames() const {
  return static_cast<std::int64_t>(std::llround(gamma_seconds * frames_per_second));
}

void SamplerConfig::validate() const {
  if (!(delta_seconds >= 0.0) || !(gamma_seconds >= 0.0)) throw ConfigError("delta and gamma must be nonnegative");
  if (!(frames_per_second > 0.0)) throw ConfigError("frames_per_second must be positive");
  if (tuples_per_video == 0) throw ConfigError("tuples_per_video must be positive");
  if (delta_frames() >= gamma_frames())
    throw ConfigError("near offset bound (" + std::to_string(delta_frames()) +
                      " frames) must be below the distant offset bound (" + std::to_string(gamma_frames()) +
                      " frames)");
}

std::array<std::int64_t, 4> SampledTuple::indices() const {
  if (order == TupleOrder::first) return {anchor, anchor + delta, anchor + gamma, 0};
  return {anchor, anchor + delta, anchor + 2 * delta, anchor + gamma};
}

std::int64_t feasible_anchor_count(std::int64_t frames, std::int64_t gamma_frames) {
  const std::int64_t low_end = frames - 1 - gamma_frames;
  if (low_end < 0) return 0;
  if (gamma_frames <= low_end + 1) return frames;
  return 2 * (low_end + 1);
}

SampledTuple sample_tuple(TupleOrder order, std::int64_t frames, const SamplerConfig& cfg, Rng& rng) {
  if (frames < 1) throw ContractError("video must have at least one frame");
  const std::int64_t gamma_min = cfg.gamma_frames();
  if (frames - 1 < gamma_min)
    throw NoValidDistantFrame("video of " + std::to_string(frames) + " frames is shorter than the distant offset " +
                              std::to_string(gamma_min) + " + 1");
  SampledTuple tuple;
  tuple.order = order;
  tuple.anchor = draw_anchor(frames, gamma_min, rng);
  tuple.delta = draw_delta(frames, tuple.anchor, cfg.delta_frames(), order, rng);
  tuple.gamma = draw_gamma(frames, tuple.anchor, gamma_min, rng);
  return tuple;
}

SampledTuple sample_first_order(std::int64_t frames, const SamplerConfig& cfg, Rng& rng) {
  return sample_tuple(TupleOrder::first, frames, cfg, rng);
}

SampledTuple sample_second_order(std::int64_t frames, const SamplerConfig& cfg, Rng& rng) {
  return sample_tuple(TupleOrder::second, frames, cfg, rng);
}

std::vector<ScheduledTuple> build_epoch_schedule(std::span<const std::int64_t> video_lengths,
                                                 const SamplerConfig& cfg, TupleOrder order, Rng& rng) {
  const std::uint64_t epoch_seed = rng.next_u64();
  std::vector<ScheduledTuple> schedule;
  schedule.reserve(video_lengths.size() * cfg.tuples_per_video);
  for (std::size_t v = 0; v < video_lengths.size(); ++v) {
    Rng stream(mix_seed(epoch_seed, v));
    try {
      for (std::size_t k = 0; k < cfg.tuples_per_video; ++k)
        schedule.push_back({v, sample_tuple(order, video_lengths[v], cfg, stream)});
    } catch (const NoValidDistantFrame& e) {
      throw NoValidDistantFrame("video " + std::to_string(v) + ": " + e.what());
    } catch (const ResampleExhausted& e) {
      throw ResampleExhausted("video " + std::to_string(v) + ": " + e.what());
    }
  }
  rng.shuffle(std::span<ScheduledTuple>(schedule));
  return schedule;
}

}  // namespace tcssl
