#pragma once

#include <span>
#include <vector>

#include "tcssl/encoder.hpp"
#include "tcssl/tensor.hpp"

namespace tcssl {

struct PhaseArch {
  EncoderArch encoder;
  std::size_t lstm_hidden = 64;
  std::size_t num_phases = 7;

  bool operator==(const PhaseArch&) const = default;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)}; }
  bool operator==(const LstmState&) const = default;
};

/// Encoder followed by a single-layer LSTM and a linear phase classifier.
///
/// LSTM gate rows are stacked [input; forget; candidate; output] in
/// "lstm.wx" [4H x d], "lstm.wh" [4H x H] and "lstm.b" [4H]. The classifier
/// is "classifier.weight" [K x H] and "classifier.bias" [K].
class PhaseModel {
 public:
  explicit PhaseModel(PhaseArch arch);
  PhaseModel(Encoder encoder, std::size_t lstm_hidden, std::size_t num_phases);

  const PhaseArch& arch() const { return arch_; }
  std::size_t hidden() const { return arch_.lstm_hidden; }
  std::size_t num_phases() const { return arch_.num_phases; }

  Encoder& encoder() { return encoder_; }
  const Encoder& encoder() const { return encoder_; }

  const Tensor& lstm_wx() const { return head_[0]; }
  const Tensor& lstm_wh() const { return head_[1]; }
  const Tensor& lstm_bias() const { return head_[2]; }
  const Tensor& classifier_weight() const { return head_[3]; }
  const Tensor& classifier_bias() const { return head_[4]; }

  /// Encoder tensors first, then the LSTM and classifier tensors.
  ParamRefs parameters();
  ConstParamRefs parameters() const;
  /// LSTM and classifier tensors only.
  ParamRefs head_parameters();

  /// Index of the first head tensor within parameters().
  std::size_t head_offset() const { return encoder_.parameters().size(); }

 private:
  void build_head();

  PhaseArch arch_;
  Encoder encoder_;
  std::vector<Tensor> head_;
};

struct StepOutput {
  std::vector<double> logits;
  LstmState state;
};

/// One recurrent step from an already computed embedding.
StepOutput lstm_step(const PhaseModel& model, std::span<const double> embedding, const LstmState& state_in);

/// Intermediate values of a chunk forward pass, kept for backpropagation.
struct PhaseCache {
  EncoderCache encoder;
  Matrix embeddings;
  LstmState initial;
  Matrix gates;   // per step [i f g o], post-activation, 4H wide
  Matrix cells;   // c_t
  Matrix hidden;  // h_t
};

struct ChunkOutput {
  Matrix logits;  // one row per frame
  LstmState state;
};

/// Encodes consecutive frames of one video and unrolls the LSTM from
/// `state_in`. Pass a cache to enable phase_backward_chunk.
ChunkOutput phase_forward_chunk(const PhaseModel& model, const Matrix& frames, const LstmState& state_in,
                                PhaseCache* cache = nullptr);

/// Backpropagation through time within the chunk; the incoming state is a
/// constant. Accumulates into `grads` (aligned with model.parameters()).
void phase_backward_chunk(const PhaseModel& model, const PhaseCache& cache, const Matrix& logit_grads,
                          Gradients& grads);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Numerically stable softmax cross-entropy; gradient = softmax - one_hot.
CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label);

std::size_t argmax(std::span<const double> values);

}  // namespace tcssl
