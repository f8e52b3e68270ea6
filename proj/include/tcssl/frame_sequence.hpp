#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcssl/tensor.hpp"

namespace tcssl {

/// One procedure: T frames of n_in float features at a fixed sampling rate,
/// optionally with one phase id per frame.
struct FrameSequence {
  std::string video_id;
  double fps = 5.0;
  std::size_t feature_dim = 0;
  std::vector<float> features;  // T x feature_dim, row-major
  std::optional<std::vector<int>> labels;

  std::size_t frames() const { return feature_dim == 0 ? 0 : features.size() / feature_dim; }
  std::span<const float> frame(std::size_t t) const { return {features.data() + t * feature_dim, feature_dim}; }

  /// Frames [begin, end) widened to double, one per row.
  Matrix frame_block(std::size_t begin, std::size_t end) const;

  /// Throws DataError when features and labels disagree in length.
  void validate() const;

  bool operator==(const FrameSequence&) const = default;
};

/// Keeps every `stride`-th frame starting at frame 0.
FrameSequence subsample(const FrameSequence& video, std::size_t stride);

}  // namespace tcssl
