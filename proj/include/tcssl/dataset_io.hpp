#pragma once

// On-disk formats.
//
// Feature file (little-endian):
//   "TCSL" | u16 version | u32 id_len | id bytes (UTF-8) | u32 T | u32 n_in |
//   f32 fps | T*n_in f32 features, row-major
// Labels sidecar: CSV "frame_index,phase_id" with a header line.
// Splits: text, one "video_id,set" line per video, set in {A,B,C,D}.
// Dataset manifest: JSON (manifest.json).
// Checkpoint: "TCSC" | u16 version | u32 tensor count | tensor records |
//   u8 has_optimizer [| optimizer state] | u32 json_len | JSON metadata.
//   Tensor record: u32 name_len | name | u32 layer_len | layer | u8 trainable |
//   u32 fan_in | u32 rank | rank*u32 dims | f64 values.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcssl/adam.hpp"
#include "tcssl/encoder.hpp"
#include "tcssl/frame_sequence.hpp"
#include "tcssl/phase_model.hpp"
#include "tcssl/synthetic.hpp"

namespace tcssl {

inline constexpr std::uint16_t kFeatureFormatVersion = 1;
inline constexpr std::uint16_t kCheckpointFormatVersion = 1;

/// Writes `bytes` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string encode_features(const FrameSequence& video);
/// Parses a feature file; labels are left empty. Errors name the byte offset.
FrameSequence decode_features(const std::string& bytes);

std::string encode_labels(const std::vector<int>& labels);
/// An empty file or a header-only file yields no labels.
std::optional<std::vector<int>> decode_labels(const std::string& text);

/// Sidecar path of a feature file: "x/video.tcsl" -> "x/video.labels.csv".
std::filesystem::path labels_path_for(const std::filesystem::path& features_path);

/// Writes the feature file and, when labels are present, its sidecar.
void write_video(const std::filesystem::path& path, const FrameSequence& video);
/// Reads a feature file and its sidecar when one exists.
FrameSequence read_video(const std::filesystem::path& path);

std::string encode_splits(const DatasetManifest& manifest);
std::vector<std::pair<std::string, Split>> decode_splits(const std::string& text);

std::string encode_manifest(const DatasetManifest& manifest);

/// Directory layout: manifest.json, splits.txt, videos/<id>.tcsl (+ sidecar).
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

struct Checkpoint {
  nlohmann::ordered_json metadata;  // "kind", architecture, caller extras
  std::vector<Tensor> tensors;
  std::optional<AdamState> optimizer;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

Checkpoint make_checkpoint(const Encoder& encoder, nlohmann::ordered_json extra = nlohmann::ordered_json::object(),
                           const AdamState* optimizer = nullptr);
Checkpoint make_checkpoint(const PhaseModel& model, nlohmann::ordered_json extra = nlohmann::ordered_json::object(),
                           const AdamState* optimizer = nullptr);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the encoder held by an encoder or phase-model checkpoint. When
/// `expected` is given the stored architecture must match it.
Encoder encoder_from_checkpoint(const Checkpoint& ckpt, const EncoderArch* expected = nullptr);
PhaseModel phase_model_from_checkpoint(const Checkpoint& ckpt, const PhaseArch* expected = nullptr);

}  // namespace tcssl
