#pragma once

// Pretrain / fine-tune / evaluate pipelines shared by the command-line tool
// and the acceptance suite. Every random choice of a run derives from one
// integer seed, so a run is a pure function of (data, config, seed).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tcssl/config.hpp"
#include "tcssl/encoder.hpp"
#include "tcssl/phase_model.hpp"
#include "tcssl/synthetic.hpp"
#include "tcssl/trainers.hpp"

namespace tcssl {

inline constexpr std::string_view kArtifactVersion = "tcssl 0.1.0";

/// Independent streams of one run.
enum class Stream : std::uint64_t { encoder_init = 1, pretrain = 2, head_init = 3, finetune = 4 };
Rng stream_for(std::uint64_t seed, Stream stream);

/// Videos of the given splits (e.g. "ABC") at their stored rate.
std::vector<FrameSequence> videos_of(const Dataset& dataset, std::string_view splits);

/// Videos of the given splits resampled to finetune.sample_rate_hz.
std::vector<FrameSequence> phase_videos_of(const Dataset& dataset, std::string_view splits, const Config& cfg);

/// Common frame rate of `videos`; throws DataError when they disagree.
double common_fps(std::span<const FrameSequence> videos);

Encoder initial_encoder(const Config& cfg, std::size_t input_dim, std::uint64_t seed);

PretrainResult run_pretrain(Encoder& encoder, const Config& cfg, PretrainMethod method,
                            std::span<const FrameSequence> unlabeled, std::uint64_t seed);

/// Wraps `encoder` into a phase model with a freshly initialised LSTM and
/// classifier, freezing the lowest finetune.frozen_encoder_layers layers.
PhaseModel assemble_phase_model(const Config& cfg, Encoder encoder, std::uint64_t seed);

FinetuneResult run_finetune(PhaseModel& model, const Config& cfg, std::span<const FrameSequence> labeled,
                            std::uint64_t seed);

struct CompareOptions {
  std::vector<std::uint64_t> seeds;
  std::string labeled_sets = "A";
  std::string pretrain_sets = "ABC";
  std::string test_split = "D";
  std::vector<PretrainMethod> methods;
  std::size_t threads = 1;
};

struct CompareRun {
  std::uint64_t seed = 0;
  std::string arm;  // "none" or a method name
  AggregateReport report;
  std::size_t finetune_epochs = 0;
  bool reached_stop = false;
  double final_train_accuracy = 0.0;
  std::vector<double> pretrain_loss;
};

struct CompareResult {
  std::vector<std::string> arms;  // "none" first
  std::vector<std::uint64_t> seeds;
  std::vector<CompareRun> runs;   // seed-major, arms in order

  const CompareRun& run(std::uint64_t seed, const std::string& arm) const;
};

/// Baseline and one pretrained arm per method, for every seed. Arms of the
/// same seed share the initial encoder and head initialisation.
CompareResult run_compare(const Dataset& dataset, const Config& cfg, const CompareOptions& options);

/// Record of one command invocation, sufficient to replay it.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json args = nlohmann::ordered_json::object();
  std::string preset;
  std::map<std::string, std::string> config;
  nlohmann::ordered_json resolved = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  double duration_seconds = 0.0;

  std::string encode() const;
  static RunManifest decode(const std::string& text);
};

}  // namespace tcssl
