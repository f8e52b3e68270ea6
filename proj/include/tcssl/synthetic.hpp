#pragma once

#include <vector>

#include "tcssl/frame_sequence.hpp"
#include "tcssl/rng.hpp"
#include "tcssl/tensor.hpp"

namespace tcssl {

struct SynthConfig {
  std::size_t num_phases = 7;
  std::size_t feature_dim = 16;
  std::size_t min_phase_frames = 60;
  std::size_t max_phase_frames = 300;
  double prototype_scale = 2.0;
  double drift_step = 0.02;
  double noise_std = 0.5;
  double fps = 5.0;
  double skip_probability = 0.1;

  void validate() const;
};

/// One prototype feature vector per phase (row k = phase k).
struct PhasePrototypes {
  Matrix values;
};

PhasePrototypes draw_prototypes(const SynthConfig& cfg, Rng& rng);

/// Phases 0..K-1 in order, each skipped with cfg.skip_probability (at least
/// two kept), durations uniform in [min, max] frames. Each frame is its
/// phase prototype plus a per-video Gaussian random-walk drift plus iid
/// Gaussian noise.
FrameSequence generate_procedure(const SynthConfig& cfg, const PhasePrototypes& prototypes, Rng& rng,
                                 std::string video_id);

enum class Split : char { A = 'A', B = 'B', C = 'C', D = 'D' };

struct VideoEntry {
  std::string video_id;
  std::size_t frames = 0;
  double fps = 0.0;
  std::size_t feature_dim = 0;
  bool has_labels = false;
  Split split = Split::A;
};

struct DatasetManifest {
  std::vector<VideoEntry> videos;
  std::string provenance;  // JSON text describing how the data was produced
};

struct Dataset {
  std::vector<FrameSequence> videos;
  DatasetManifest manifest;

  /// Videos whose split is one of `splits`, in manifest order.
  std::vector<FrameSequence> select(std::string_view splits) const;
};

/// Sorts videos by length (ties by position) and deals them A, B, C, D in turn.
std::vector<Split> assign_splits(const std::vector<std::size_t>& lengths);

/// Shared prototypes, one independent stream per video. Video i depends only
/// on the seed and i, so growing n_videos keeps earlier videos unchanged.
Dataset generate_dataset(const SynthConfig& cfg, std::size_t n_videos, Rng& rng);

}  // namespace tcssl
