#include "tcssl/adam.hpp"

#include <cmath>

#include "tcssl/errors.hpp"

namespace tcssl {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

AdamState AdamState::for_parameters(const ConstParamRefs& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const Tensor* p : params) {
    s.first_moment.emplace_back(p->size(), 0.0);
    s.second_moment.emplace_back(p->size(), 0.0);
  }
  return s;
}

void adam_step(const ParamRefs& params, const Gradients& grads, AdamState& state) {
  if (grads.buffers.size() != params.size() || state.first_moment.size() != params.size())
    throw ContractError("adam_step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (grads.buffers[i].size() != params[i]->size() || state.first_moment[i].size() != params[i]->size())
      throw ContractError("adam_step: shape mismatch for " + params[i]->name);

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (!p.trainable) continue;
    const auto& g = grads.buffers[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.values.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p.values[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace tcssl
