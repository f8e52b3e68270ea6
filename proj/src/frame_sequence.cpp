#include "tcssl/frame_sequence.hpp"

#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

Matrix FrameSequence::frame_block(std::size_t begin, std::size_t end) const {
  if (begin > end || end > frames()) throw ContractError("frame range out of bounds");
  Matrix m(end - begin, feature_dim);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = features[begin * feature_dim + i];
  return m;
}

void FrameSequence::validate() const {
  if (feature_dim == 0) throw DataError(video_id + ": feature dimension is zero");
  if (features.size() % feature_dim != 0) throw DataError(video_id + ": feature count is not a multiple of n_in");
  if (labels && labels->size() != frames())
    throw DataError(video_id + ": " + std::to_string(labels->size()) + " labels for " + std::to_string(frames()) +
                    " frames");
}

FrameSequence subsample(const FrameSequence& video, std::size_t stride) {
  if (stride == 0) throw ContractError("subsample stride must be positive");
  FrameSequence out;
  out.video_id = video.video_id;
  out.fps = video.fps / static_cast<double>(stride);
  out.feature_dim = video.feature_dim;
  if (video.labels) out.labels.emplace();
  for (std::size_t t = 0; t < video.frames(); t += stride) {
    const auto f = video.frame(t);
    out.features.insert(out.features.end(), f.begin(), f.end());
    if (video.labels) out.labels->push_back((*video.labels)[t]);
  }
  return out;
}

}  // namespace tcssl
