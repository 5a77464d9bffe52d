#include "s2p/nn/adam.hpp"

#include <cmath>

#include "s2p/error.hpp"

namespace s2p::nn {

AdamState AdamState::for_parameters(std::span<Parameter* const> params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const Parameter* p : params) {
    s.first_moment.emplace_back(p->value.shape());
    s.second_moment.emplace_back(p->value.shape());
  }
  return s;
}

void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " + std::to_string(grads.size()) +
                     " gradients, " + std::to_string(state.first_moment.size()) + " moment slots");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("adam_step: learning rate must be finite and >= 0");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i]->value.shape() || state.first_moment[i].shape() != params[i]->value.shape()) {
      throw ShapeError("adam_step: shape mismatch for parameter '" + params[i]->name + "'");
    }
    if (params[i]->trainable) require_finite(grads[i], "gradient of '" + params[i]->name + "'");
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!p.trainable) continue;
    auto w = p.value.data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace s2p::nn
