#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tcssl {

/// Dense row-major matrix of doubles. Batches of vectors are stored one per row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// A named trainable parameter. `layer` groups tensors that are frozen or
/// unfrozen together; `fan_in` is the number of inputs feeding the layer.
struct Tensor {
  std::string name;
  std::string layer;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::size_t fan_in = 1;
  bool trainable = true;

  std::size_t size() const { return values.size(); }
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
Tensor make_tensor(std::string name, std::string layer, std::vector<std::size_t> shape, std::size_t fan_in);

using ParamRefs = std::vector<Tensor*>;
using ConstParamRefs = std::vector<const Tensor*>;

/// Gradient buffers aligned index-for-index with a parameter list.
struct Gradients {
  std::vector<std::vector<double>> buffers;

  static Gradients zeros_like(const ConstParamRefs& params);
  void zero();
  bool all_zero() const;
};

ConstParamRefs as_const(const ParamRefs& params);

/// Marks every tensor of `layer` trainable or frozen. Throws ContractError
/// when no tensor belongs to that layer.
void set_layer_trainable(const ParamRefs& params, const std::string& layer, bool trainable);

/// Applies `trainable` to every tensor.
void set_all_trainable(const ParamRefs& params, bool trainable);

/// Distinct layer names in parameter order.
std::vector<std::string> layer_names(const ConstParamRefs& params);

}  // namespace tcssl
