#pragma once

#include "s2p/nn/tensor.hpp"

namespace s2p::nn {

struct LossResult {
  double loss = 0.0;
  Tensor grad;
};

/// Mean squared error over every element; grad = 2 (pred - target) / N.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace s2p::nn
