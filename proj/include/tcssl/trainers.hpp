#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tcssl/adam.hpp"
#include "tcssl/encoder.hpp"
#include "tcssl/frame_sequence.hpp"
#include "tcssl/metrics.hpp"
#include "tcssl/phase_model.hpp"
#include "tcssl/rng.hpp"
#include "tcssl/temporal_losses.hpp"
#include "tcssl/tuple_sampler.hpp"

namespace tcssl {

enum class PretrainMethod { contrastive, ranking, contrastive2 };

std::string_view to_string(PretrainMethod method);
PretrainMethod parse_pretrain_method(std::string_view name);

/// Loss used by a method: contrastive2 trains on the combined first and
/// second order loss.
LossKind loss_kind_for(PretrainMethod method);
TupleOrder tuple_order_for(PretrainMethod method);

struct PretrainConfig {
  PretrainMethod method = PretrainMethod::contrastive;
  std::size_t epochs = 25;
  std::size_t batch_size = 64;
  SamplerConfig sampler;
  LossConfig loss;
  AdamConfig adam;

  void validate() const;
};

struct PretrainResult {
  std::vector<double> epoch_loss;  // mean tuple loss per epoch
};

/// Self-supervised training of `encoder` on tuples drawn from the unlabeled
/// videos. All branches share the encoder weights; one Adam step per batch.
PretrainResult pretrain(Encoder& encoder, std::span<const FrameSequence> videos, const PretrainConfig& cfg, Rng& rng);

/// Mean loss and parameter gradient of one batch of tuples, without updating
/// the encoder. Used by pretrain and by gradient checks.
double pretrain_batch_gradient(const Encoder& encoder, std::span<const FrameSequence> videos,
                               std::span<const ScheduledTuple> batch, LossKind kind, const LossConfig& loss,
                               Gradients& grads);

struct FinetuneConfig {
  std::size_t batch_frames = 128;
  std::size_t accumulate_batches = 3;
  double stop_train_accuracy = 0.999;
  std::size_t max_epochs = 100;
  AdamConfig adam;

  void validate() const;
};

struct FinetuneEpoch {
  std::size_t epoch = 0;
  double train_accuracy = 0.0;  // fraction of frames predicted correctly during the epoch
  double mean_loss = 0.0;       // frame-weighted mean cross-entropy
  std::size_t optimizer_steps = 0;
};

struct FinetuneResult {
  std::vector<FinetuneEpoch> log;
  bool reached_stop = false;
};

struct ChunkTrace {
  std::size_t epoch = 0;
  std::size_t video = 0;  // index into the labeled video list
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Supervised training with stateful chunks: each video starts from a zero
/// LSTM state, is consumed in consecutive chunks of cfg.batch_frames with
/// the state carried (detached) between chunks, and the optimizer steps
/// every cfg.accumulate_batches chunks.
FinetuneResult finetune(PhaseModel& model, std::span<const FrameSequence> videos, const FinetuneConfig& cfg, Rng& rng,
                        const std::function<void(const ChunkTrace&)>& on_chunk = {});

/// Argmax phase per frame from one stateful pass over the whole video.
std::vector<int> predict_phases(const PhaseModel& model, const FrameSequence& video);

struct Evaluation {
  std::vector<VideoMetrics> per_video;
  AggregateReport report;
};

Evaluation evaluate(const PhaseModel& model, std::span<const FrameSequence> videos);

}  // namespace tcssl
