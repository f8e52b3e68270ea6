#pragma once

#include <span>
#include <vector>

#include "tcssl/rng.hpp"
#include "tcssl/temporal_losses.hpp"
#include "tcssl/tensor.hpp"

namespace tcssl {

struct EncoderArch {
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden = {64};
  std::size_t embedding_dim = 32;

  bool operator==(const EncoderArch&) const = default;
};

/// Activations kept by a training forward pass: inputs[l] is the input of
/// layer l, inputs.back() the final output.
struct EncoderCache {
  std::vector<Matrix> inputs;
};

/// Frame encoder: stacked affine layers, rectified between layers, with a
/// linear output layer producing the embedding. Layer l owns the tensors
/// "encoder.l.weight" [out x in] and "encoder.l.bias" [out].
class Encoder {
 public:
  explicit Encoder(EncoderArch arch);

  const EncoderArch& arch() const { return arch_; }
  std::size_t num_layers() const { return params_.size() / 2; }
  std::size_t input_dim() const { return arch_.input_dim; }
  std::size_t embedding_dim() const { return arch_.embedding_dim; }

  Tensor& weight(std::size_t layer) { return params_[2 * layer]; }
  Tensor& bias(std::size_t layer) { return params_[2 * layer + 1]; }
  const Tensor& weight(std::size_t layer) const { return params_[2 * layer]; }
  const Tensor& bias(std::size_t layer) const { return params_[2 * layer + 1]; }

  ParamRefs parameters();
  ConstParamRefs parameters() const;

  Embedding forward(std::span<const double> x) const;
  Matrix forward(const Matrix& batch) const;
  Matrix forward(const Matrix& batch, EncoderCache& cache) const;

  /// Accumulates dL/dparams into `grads` (aligned with parameters()) for
  /// trainable layers only. When `input_grad` is non-null it receives dL/dx.
  void backward(const EncoderCache& cache, const Matrix& upstream, Gradients& grads,
                Matrix* input_grad = nullptr) const;

 private:
  EncoderArch arch_;
  std::vector<Tensor> params_;
};

/// Draws every tensor uniformly from (-1/sqrt(n), 1/sqrt(n)), n = fan-in.
void init_uniform_fan(const ParamRefs& params, Rng& rng);

/// Dense layer y = W x + b over a batch, W stored [out x in].
void affine_forward(const Matrix& x, std::span<const double> weight, std::span<const double> bias, Matrix& y);

}  // namespace tcssl
