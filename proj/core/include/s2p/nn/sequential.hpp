#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "s2p/nn/layer.hpp"

namespace s2p::nn {

/// How batch-norm layers normalize during a train-mode pass.
enum class BatchStatistics {
  batch,              ///< batch statistics everywhere (plain training)
  frozen_if_untrainable,  ///< running statistics in layers with no trainable parameter
  frozen,             ///< running statistics everywhere
};

struct ForwardOptions {
  Mode mode = Mode::infer;
  /// Base seed for dropout masks; each layer derives its own stream.
  std::uint64_t seed = 0;
  BatchStatistics statistics = BatchStatistics::batch;
};

/// Per-layer caches from one forward pass.
struct Trace {
  std::vector<Cache> caches;
};

/// Parameter gradients for every layer, aligned with layers()/parameters().
using LayerGrads = std::vector<std::vector<Tensor>>;

/// Ordered stack of layers. Copies are deep.
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  Layer& add(std::unique_ptr<Layer> layer);

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Throws ShapeError naming the first layer whose input does not fit.
  Shape output_shape(Shape input) const;

  /// With `trace`, caches are recorded for backward().
  Tensor forward(const Tensor& input, const ForwardOptions& options, Trace* trace = nullptr) const;

  struct Gradients {
    Tensor input_grad;
    LayerGrads params;
  };
  Gradients backward(const Trace& trace, const Tensor& upstream) const;

  /// Folds train-mode batch-norm statistics from `trace` into running stats.
  void commit_statistics(const Trace& trace);

  void initialize(std::uint64_t seed);

  /// Flat views over every parameter in layer order.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  nlohmann::json descriptor() const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Seed for stream `index` derived from `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace s2p::nn
