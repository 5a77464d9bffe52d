#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/nn/tensor.hpp"

namespace s2p::nn {

enum class Mode { train, infer };

enum class LayerKind : std::uint8_t { conv2d, batchnorm, relu, dropout, dense, flatten };

std::string_view to_string(LayerKind kind);

/// A named, optionally frozen, learnable tensor.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

class Layer;

/// State saved by a forward pass for the matching backward pass. Only the
/// layer that produced it interprets `saved`.
struct Cache {
  const Layer* owner = nullptr;
  Mode mode = Mode::infer;
  Shape input_shape;
  std::vector<Tensor> saved;
};

struct ForwardResult {
  Tensor output;
  Cache cache;
};

struct BackwardResult {
  Tensor input_grad;
  /// Aligned with Layer::parameters().
  std::vector<Tensor> param_grads;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Output extents for a given input; throws ShapeError when the input
  /// does not match the layer's configuration.
  virtual Shape output_shape(const Shape& input) const = 0;

  /// Pure: never mutates the layer. Dropout in train mode needs `seed`.
  virtual ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const = 0;

  /// Gradients for every parameter, frozen or not.
  virtual BackwardResult backward(const Cache& cache, const Tensor& upstream) const = 0;

  /// Folds the batch statistics held in a train-mode cache into running
  /// statistics. No-op for layers without them.
  virtual void update_statistics(const Cache&) {}

  /// Draws fresh parameter values.
  virtual void initialize(std::mt19937_64&) {}

  virtual nlohmann::json config() const = 0;

  const std::string& name() const { return name_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  /// Non-learned state (batch-norm running statistics).
  std::vector<Parameter>& buffers() { return buffers_; }
  const std::vector<Parameter>& buffers() const { return buffers_; }

  bool has_trainable_parameters() const;

 protected:
  void check_cache(const Cache& cache, const Tensor& upstream, const Shape& expected_upstream) const;

  std::string name_;
  std::vector<Parameter> params_;
  std::vector<Parameter> buffers_;
};

/// Explicit zero/one-sided padding on the two spatial axes.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  friend bool operator==(const Padding&, const Padding&) = default;
};

struct Conv2dConfig {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  Padding padding;
  bool bias = true;
};

/// 2-D cross-correlation over (N, C, H, W) inputs; weight is
/// (out_channels, in_channels, kernel_h, kernel_w).
class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, Conv2dConfig cfg);

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }
  Shape output_shape(const Shape& input) const override;
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  void initialize(std::mt19937_64& rng) override;
  nlohmann::json config() const override;

  const Conv2dConfig& settings() const { return cfg_; }
  Tensor& weight() { return params_[0].value; }
  const Tensor& weight() const { return params_[0].value; }

 private:
  Conv2dConfig cfg_;
};

/// Per-channel batch normalization for (N, C) or (N, C, H, W) inputs.
class BatchNorm final : public Layer {
 public:
  static constexpr double kDefaultMomentum = 0.1;
  static constexpr double kDefaultEpsilon = 1e-5;

  BatchNorm(std::string name, std::size_t channels, double momentum = kDefaultMomentum,
            double epsilon = kDefaultEpsilon);

  LayerKind kind() const override { return LayerKind::batchnorm; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }
  Shape output_shape(const Shape& input) const override;
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  void update_statistics(const Cache& cache) override;
  void initialize(std::mt19937_64& rng) override;
  nlohmann::json config() const override;

  std::size_t channels() const { return channels_; }
  const Tensor& running_mean() const { return buffers_[0].value; }
  const Tensor& running_var() const { return buffers_[1].value; }

 private:
  std::size_t channels_;
  double momentum_;
  double epsilon_;
};

class Relu final : public Layer {
 public:
  explicit Relu(std::string name) : Layer(std::move(name)) {}

  LayerKind kind() const override { return LayerKind::relu; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
  Shape output_shape(const Shape& input) const override { return input; }
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  nlohmann::json config() const override;
};

/// Inverted dropout: surviving activations are scaled by 1/(1-rate) at
/// train time, so inference is the identity.
class Dropout final : public Layer {
 public:
  Dropout(std::string name, double rate);

  LayerKind kind() const override { return LayerKind::dropout; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  Shape output_shape(const Shape& input) const override { return input; }
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  nlohmann::json config() const override;

  double rate() const { return rate_; }

 private:
  double rate_;
};

/// Fully connected y = W x + b over (N, in) inputs; weight is (out, in).
class Dense final : public Layer {
 public:
  Dense(std::string name, std::size_t in_features, std::size_t out_features, bool bias = true);

  LayerKind kind() const override { return LayerKind::dense; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  Shape output_shape(const Shape& input) const override;
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  void initialize(std::mt19937_64& rng) override;
  nlohmann::json config() const override;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Tensor& weight() { return params_[0].value; }
  const Tensor& weight() const { return params_[0].value; }

 private:
  std::size_t in_;
  std::size_t out_;
  bool bias_;
};

/// (N, ...) -> (N, prod(...)).
class Flatten final : public Layer {
 public:
  explicit Flatten(std::string name) : Layer(std::move(name)) {}

  LayerKind kind() const override { return LayerKind::flatten; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
  Shape output_shape(const Shape& input) const override;
  ForwardResult forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed = {}) const override;
  BackwardResult backward(const Cache& cache, const Tensor& upstream) const override;
  nlohmann::json config() const override;
};

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace s2p::nn
