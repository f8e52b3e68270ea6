#include "tcssl/trainers.hpp"

#include <cmath>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

std::string_view to_string(PretrainMethod method) {
  switch (method) {
    case PretrainMethod::contrastive: return "contrastive";
    case PretrainMethod::ranking: return "ranking";
    case PretrainMethod::contrastive2: return "contrastive2";
  }
  return "?";
}

PretrainMethod parse_pretrain_method(std::string_view name) {
  if (name == "contrastive") return PretrainMethod::contrastive;
  if (name == "ranking") return PretrainMethod::ranking;
  if (name == "contrastive2") return PretrainMethod::contrastive2;
  throw ConfigError("unknown pretraining method '" + std::string(name) + "'");
}

LossKind loss_kind_for(PretrainMethod method) {
  switch (method) {
    case PretrainMethod::contrastive: return LossKind::contrastive;
    case PretrainMethod::ranking: return LossKind::ranking;
    case PretrainMethod::contrastive2: return LossKind::combined;
  }
  return LossKind::contrastive;
}

TupleOrder tuple_order_for(PretrainMethod method) {
  return method == PretrainMethod::contrastive2 ? TupleOrder::second : TupleOrder::first;
}

void PretrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("pretrain batch_size must be >= 1");
  sampler.validate();
  loss.validate();
  adam.validate();
}

double pretrain_batch_gradient(const Encoder& encoder, std::span<const FrameSequence> videos,
                               std::span<const ScheduledTuple> batch, LossKind kind, const LossConfig& loss,
                               Gradients& grads) {
  const std::size_t arity = loss_arity(kind);
  const std::size_t n = batch.size();
  const std::size_t in = encoder.input_dim();
  const double scale = 1.0 / static_cast<double>(n);

  // One batched forward per branch position.
  std::vector<EncoderCache> caches(arity);
  std::vector<Matrix> embeddings(arity);
  for (std::size_t p = 0; p < arity; ++p) {
    Matrix x(n, in);
    for (std::size_t b = 0; b < n; ++b) {
      const FrameSequence& v = videos[batch[b].video];
      if (v.feature_dim != in) throw ContractError(v.video_id + ": feature dimension does not match the encoder");
      const auto frame = v.frame(static_cast<std::size_t>(batch[b].tuple.indices()[p]));
      std::copy(frame.begin(), frame.end(), x.row(b).begin());
    }
    embeddings[p] = encoder.forward(x, caches[p]);
  }

  std::vector<Matrix> upstream(arity, Matrix(n, encoder.embedding_dim()));
  double total = 0.0;
  std::vector<EmbeddingView> views(arity);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t p = 0; p < arity; ++p) views[p] = embeddings[p].row(b);
    total += loss_value(kind, views, loss);
    const auto g = loss_gradients(kind, views, loss);
    for (std::size_t p = 0; p < arity; ++p)
      for (std::size_t i = 0; i < g[p].size(); ++i) upstream[p](b, i) = scale * g[p][i];
  }
  for (std::size_t p = 0; p < arity; ++p) encoder.backward(caches[p], upstream[p], grads);
  return total * scale;
}

PretrainResult pretrain(Encoder& encoder, std::span<const FrameSequence> videos, const PretrainConfig& cfg, Rng& rng) {
  cfg.validate();
  PretrainResult result;
  if (cfg.epochs == 0) return result;
  if (videos.empty()) throw ContractError("pretrain: no videos");

  std::vector<std::int64_t> lengths;
  std::string infeasible;
  for (const auto& v : videos) {
    lengths.push_back(static_cast<std::int64_t>(v.frames()));
    if (static_cast<std::int64_t>(v.frames()) - 1 < cfg.sampler.gamma_frames())
      infeasible += (infeasible.empty() ? "" : ", ") + v.video_id + " (" + std::to_string(v.frames()) + " frames)";
  }
  if (!infeasible.empty())
    throw NoValidDistantFrame("videos too short for a distant offset of " +
                              std::to_string(cfg.sampler.gamma_frames()) + " frames: " + infeasible);

  const LossKind kind = loss_kind_for(cfg.method);
  const TupleOrder order = tuple_order_for(cfg.method);
  const ParamRefs params = encoder.parameters();
  AdamState adam = AdamState::for_parameters(as_const(params), cfg.adam);
  Gradients grads = Gradients::zeros_like(as_const(params));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto schedule = build_epoch_schedule(lengths, cfg.sampler, order, rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0, batch_index = 0; start < schedule.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(schedule.size(), start + cfg.batch_size);
      const std::span<const ScheduledTuple> batch(schedule.data() + start, end - start);
      grads.zero();
      const double loss = pretrain_batch_gradient(encoder, videos, batch, kind, cfg.loss, grads);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite pretraining loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch_index) + " (method " + std::string(to_string(cfg.method)) + ")");
      epoch_total += loss * static_cast<double>(batch.size());
      adam_step(params, grads, adam);
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(schedule.size()));
  }
  return result;
}

}  // namespace tcssl
