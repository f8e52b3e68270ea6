#pragma once

#include <cstdint>
#include <vector>

#include "tcssl/tensor.hpp"

namespace tcssl {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  static AdamState for_parameters(const ConstParamRefs& params, const AdamConfig& config);
};

/// One bias-corrected Adam update. Frozen tensors and their moments are
/// left untouched.
void adam_step(const ParamRefs& params, const Gradients& grads, AdamState& state);

}  // namespace tcssl
