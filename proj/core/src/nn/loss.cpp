#include "s2p/nn/loss.hpp"

#include "s2p/error.hpp"

namespace s2p::nn {

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mse_loss: prediction " + shape_string(pred.shape()) + " vs target " +
                     shape_string(target.shape()));
  }
  if (pred.empty()) throw ShapeError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.loss = sum / n;
  return r;
}

}  // namespace s2p::nn
