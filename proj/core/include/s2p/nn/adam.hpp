#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2p/nn/layer.hpp"

namespace s2p::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments for each parameter, plus the shared step counter.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  /// Zeroed moments shaped like `params`.
  static AdamState for_parameters(std::span<Parameter* const> params, AdamConfig config = {});
};

/// One bias-corrected ADAM update. Frozen parameters (trainable == false)
/// are skipped: neither the value nor its moments change. `lr` may be 0,
/// which leaves every value bit-identical. Throws NumericError naming the
/// parameter on a non-finite gradient.
void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state, double lr);

}  // namespace s2p::nn
