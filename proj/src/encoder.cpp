#include "tcssl/encoder.hpp"

#include <cmath>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

void affine_forward(const Matrix& x, std::span<const double> weight, std::span<const double> bias, Matrix& y) {
  const std::size_t in = x.cols;
  const std::size_t out = bias.size();
  y = Matrix(x.rows, out);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.data.data() + r * in;
    double* yr = y.data.data() + r * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* w = weight.data() + o * in;
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += w[i] * xr[i];
      yr[o] = acc + bias[o];
    }
  }
}

Encoder::Encoder(EncoderArch arch) : arch_(std::move(arch)) {
  if (arch_.input_dim == 0 || arch_.embedding_dim == 0) throw ConfigError("encoder dimensions must be positive");
  std::vector<std::size_t> dims{arch_.input_dim};
  for (std::size_t h : arch_.hidden) {
    if (h == 0) throw ConfigError("hidden layer width must be positive");
    dims.push_back(h);
  }
  dims.push_back(arch_.embedding_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string layer = "encoder." + std::to_string(l);
    params_.push_back(make_tensor(layer + ".weight", layer, {dims[l + 1], dims[l]}, dims[l]));
    params_.push_back(make_tensor(layer + ".bias", layer, {dims[l + 1]}, dims[l]));
  }
}

ParamRefs Encoder::parameters() {
  ParamRefs refs;
  for (auto& p : params_) refs.push_back(&p);
  return refs;
}

ConstParamRefs Encoder::parameters() const {
  ConstParamRefs refs;
  for (const auto& p : params_) refs.push_back(&p);
  return refs;
}

Embedding Encoder::forward(std::span<const double> x) const {
  Matrix batch(1, x.size());
  std::copy(x.begin(), x.end(), batch.data.begin());
  return forward(batch).data;
}

Matrix Encoder::forward(const Matrix& batch) const {
  EncoderCache cache;
  return forward(batch, cache);
}

Matrix Encoder::forward(const Matrix& batch, EncoderCache& cache) const {
  if (batch.cols != arch_.input_dim)
    throw ContractError("encoder input dimension " + std::to_string(batch.cols) + ", expected " +
                        std::to_string(arch_.input_dim));
  cache.inputs.clear();
  cache.inputs.reserve(num_layers() + 1);
  cache.inputs.push_back(batch);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix y;
    affine_forward(cache.inputs.back(), weight(l).values, bias(l).values, y);
    if (l + 1 < num_layers())
      for (double& v : y.data)
        if (v < 0.0) v = 0.0;  // NaN passes through so divergence is detected
    cache.inputs.push_back(std::move(y));
  }
  return cache.inputs.back();
}

void Encoder::backward(const EncoderCache& cache, const Matrix& upstream, Gradients& grads,
                       Matrix* input_grad) const {
  if (cache.inputs.size() != num_layers() + 1) throw ContractError("encoder backward: missing forward cache");
  if (upstream.rows != cache.inputs.back().rows || upstream.cols != arch_.embedding_dim)
    throw ContractError("encoder backward: upstream gradient shape mismatch");
  if (grads.buffers.size() != params_.size()) throw ContractError("encoder backward: gradient buffer mismatch");

  // Layers below the lowest trainable one need no gradient unless dL/dx is requested.
  std::size_t lowest = num_layers();
  for (std::size_t l = 0; l < num_layers(); ++l)
    if (weight(l).trainable || bias(l).trainable) {
      lowest = l;
      break;
    }
  if (input_grad != nullptr) lowest = 0;

  Matrix delta = upstream;
  for (std::size_t l = num_layers(); l-- > lowest;) {
    const Matrix& x = cache.inputs[l];
    const std::size_t in = x.cols;
    const std::size_t out = delta.cols;
    if (l + 1 < num_layers()) {
      const Matrix& y = cache.inputs[l + 1];
      for (std::size_t i = 0; i < delta.data.size(); ++i)
        if (y.data[i] <= 0.0) delta.data[i] = 0.0;
    }
    if (weight(l).trainable) {
      auto& gw = grads.buffers[2 * l];
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.data.data() + r * in;
        const double* dr = delta.data.data() + r * out;
        for (std::size_t o = 0; o < out; ++o) {
          const double d = dr[o];
          if (d == 0.0) continue;
          double* g = gw.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) g[i] += d * xr[i];
        }
      }
    }
    if (bias(l).trainable) {
      auto& gb = grads.buffers[2 * l + 1];
      for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t o = 0; o < out; ++o) gb[o] += delta(r, o);
    }
    if (l > lowest || input_grad != nullptr) {
      Matrix below(x.rows, in);
      const auto& w = weight(l).values;
      for (std::size_t r = 0; r < x.rows; ++r) {
        double* br = below.data.data() + r * in;
        const double* dr = delta.data.data() + r * out;
        for (std::size_t o = 0; o < out; ++o) {
          const double d = dr[o];
          if (d == 0.0) continue;
          const double* wr = w.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) br[i] += d * wr[i];
        }
      }
      delta = std::move(below);
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
}

void init_uniform_fan(const ParamRefs& params, Rng& rng) {
  for (Tensor* p : params) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p->fan_in));
    for (double& v : p->values) v = rng.uniform(-bound, bound);
  }
}

}  // namespace tcssl
