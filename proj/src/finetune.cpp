#include <cmath>
#include <numeric>
#include <string>

#include "tcssl/errors.hpp"
#include "tcssl/trainers.hpp"

namespace tcssl {

void FinetuneConfig::validate() const {
  if (batch_frames == 0) throw ConfigError("finetune batch_frames must be >= 1");
  if (accumulate_batches == 0) throw ConfigError("finetune accumulate_batches must be >= 1");
  // 0 is accepted and means "stop after the first epoch".
  if (!(stop_train_accuracy >= 0.0 && stop_train_accuracy <= 1.0))
    throw ConfigError("stop_train_accuracy must lie in [0, 1]");
  adam.validate();
}

namespace {

void check_labeled(const PhaseModel& model, const FrameSequence& v) {
  if (!v.labels) throw DataError(v.video_id + ": phase labels are missing");
  v.validate();
  if (v.feature_dim != model.encoder().input_dim())
    throw ContractError(v.video_id + ": feature dimension " + std::to_string(v.feature_dim) +
                        " does not match the model input " + std::to_string(model.encoder().input_dim()));
  for (int label : *v.labels)
    if (label < 0 || static_cast<std::size_t>(label) >= model.num_phases())
      throw DataError(v.video_id + ": phase id " + std::to_string(label) + " out of range");
}

}  // namespace

FinetuneResult finetune(PhaseModel& model, std::span<const FrameSequence> videos, const FinetuneConfig& cfg, Rng& rng,
                        const std::function<void(const ChunkTrace&)>& on_chunk) {
  cfg.validate();
  if (videos.empty()) throw ContractError("finetune: no labeled videos");
  for (const auto& v : videos) check_labeled(model, v);

  const ParamRefs params = model.parameters();
  AdamState adam = AdamState::for_parameters(as_const(params), cfg.adam);
  Gradients grads = Gradients::zeros_like(as_const(params));
  const std::size_t K = model.num_phases();

  FinetuneResult result;
  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    std::size_t correct = 0, seen = 0, pending = 0, steps = 0;
    double loss_sum = 0.0;
    for (std::size_t vi : order) {
      const FrameSequence& video = videos[vi];
      const auto& labels = *video.labels;
      LstmState state = LstmState::zeros(model.hidden());
      for (std::size_t begin = 0; begin < video.frames(); begin += cfg.batch_frames) {
        const std::size_t end = std::min(video.frames(), begin + cfg.batch_frames);
        if (on_chunk) on_chunk({epoch, vi, begin, end});
        PhaseCache cache;
        ChunkOutput out = phase_forward_chunk(model, video.frame_block(begin, end), state, &cache);
        const std::size_t n = end - begin;
        Matrix dlogits(n, K);
        double chunk_loss = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const auto row = out.logits.row(t);
          const auto label = static_cast<std::size_t>(labels[begin + t]);
          const CrossEntropy ce = softmax_cross_entropy(row, label);
          chunk_loss += ce.loss;
          for (std::size_t k = 0; k < K; ++k) dlogits(t, k) = ce.gradient[k] / static_cast<double>(n);
          if (argmax(row) == label) ++correct;
        }
        if (!std::isfinite(chunk_loss))
          throw TrainingError("non-finite fine-tuning loss in " + video.video_id + " frames [" +
                              std::to_string(begin) + ", " + std::to_string(end) + ") at epoch " +
                              std::to_string(epoch + 1));
        loss_sum += chunk_loss;
        seen += n;
        phase_backward_chunk(model, cache, dlogits, grads);
        state = std::move(out.state);
        if (++pending == cfg.accumulate_batches) {
          adam_step(params, grads, adam);
          grads.zero();
          pending = 0;
          ++steps;
        }
      }
    }
    if (pending > 0) {
      adam_step(params, grads, adam);
      grads.zero();
      ++steps;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    result.log.push_back({epoch + 1, accuracy, loss_sum / static_cast<double>(seen), steps});
    if (accuracy > cfg.stop_train_accuracy || cfg.stop_train_accuracy <= 0.0) {
      result.reached_stop = true;
      break;
    }
  }
  return result;
}

std::vector<int> predict_phases(const PhaseModel& model, const FrameSequence& video) {
  if (video.frames() == 0) return {};
  if (video.feature_dim != model.encoder().input_dim())
    throw ContractError(video.video_id + ": feature dimension does not match the model input");
  const ChunkOutput out = phase_forward_chunk(model, video.frame_block(0, video.frames()),
                                              LstmState::zeros(model.hidden()));
  std::vector<int> pred(video.frames());
  for (std::size_t t = 0; t < pred.size(); ++t) pred[t] = static_cast<int>(argmax(out.logits.row(t)));
  return pred;
}

Evaluation evaluate(const PhaseModel& model, std::span<const FrameSequence> videos) {
  if (videos.empty()) throw ContractError("evaluate: no videos");
  Evaluation ev;
  for (const auto& v : videos) {
    check_labeled(model, v);
    const auto pred = predict_phases(model, v);
    ev.per_video.push_back(video_metrics(*v.labels, pred, model.num_phases()));
  }
  ev.report = aggregate(ev.per_video);
  return ev;
}

}  // namespace tcssl
