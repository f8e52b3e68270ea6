#include "tcssl/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "tcssl/errors.hpp"

namespace tcssl {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor make_tensor(std::string name, std::string layer, std::vector<std::size_t> shape, std::size_t fan_in) {
  Tensor t;
  t.name = std::move(name);
  t.layer = std::move(layer);
  t.values.assign(shape_size(shape), 0.0);
  t.shape = std::move(shape);
  t.fan_in = fan_in;
  return t;
}

Gradients Gradients::zeros_like(const ConstParamRefs& params) {
  Gradients g;
  g.buffers.reserve(params.size());
  for (const Tensor* p : params) g.buffers.emplace_back(p->size(), 0.0);
  return g;
}

void Gradients::zero() {
  for (auto& b : buffers) std::fill(b.begin(), b.end(), 0.0);
}

bool Gradients::all_zero() const {
  for (const auto& b : buffers)
    for (double v : b)
      if (v != 0.0) return false;
  return true;
}

ConstParamRefs as_const(const ParamRefs& params) { return {params.begin(), params.end()}; }

void set_layer_trainable(const ParamRefs& params, const std::string& layer, bool trainable) {
  bool found = false;
  for (Tensor* p : params) {
    if (p->layer == layer) {
      p->trainable = trainable;
      found = true;
    }
  }
  if (!found) throw ContractError("unknown layer '" + layer + "'");
}

void set_all_trainable(const ParamRefs& params, bool trainable) {
  for (Tensor* p : params) p->trainable = trainable;
}

std::vector<std::string> layer_names(const ConstParamRefs& params) {
  std::vector<std::string> names;
  for (const Tensor* p : params)
    if (std::find(names.begin(), names.end(), p->layer) == names.end()) names.push_back(p->layer);
  return names;
}

}  // namespace tcssl
