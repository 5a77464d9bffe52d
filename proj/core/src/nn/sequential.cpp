#include "s2p/nn/sequential.hpp"

#include "s2p/error.hpp"

namespace s2p::nn {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Sequential::Sequential(const Sequential& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Layer& Sequential::add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
  return *layers_.back();
}

Shape Sequential::output_shape(Shape input) const {
  for (const auto& l : layers_) input = l->output_shape(input);
  return input;
}

Tensor Sequential::forward(const Tensor& input, const ForwardOptions& options, Trace* trace) const {
  if (trace) {
    trace->caches.clear();
    trace->caches.reserve(layers_.size());
  }
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = *layers_[i];
    Mode mode = options.mode;
    if (mode == Mode::train && l.kind() == LayerKind::batchnorm) {
      if (options.statistics == BatchStatistics::frozen ||
          (options.statistics == BatchStatistics::frozen_if_untrainable && !l.has_trainable_parameters())) {
        mode = Mode::infer;
      }
    }
    ForwardResult r = l.forward(x, mode, derive_seed(options.seed, i));
    x = std::move(r.output);
    if (trace) trace->caches.push_back(std::move(r.cache));
  }
  return x;
}

Sequential::Gradients Sequential::backward(const Trace& trace, const Tensor& upstream) const {
  if (trace.caches.size() != layers_.size()) {
    throw ContractError("backward: trace holds " + std::to_string(trace.caches.size()) + " caches for " +
                        std::to_string(layers_.size()) + " layers");
  }
  Gradients g;
  g.params.resize(layers_.size());
  Tensor grad = upstream;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    BackwardResult r = layers_[i]->backward(trace.caches[i], grad);
    grad = std::move(r.input_grad);
    g.params[i] = std::move(r.param_grads);
  }
  g.input_grad = std::move(grad);
  return g;
}

void Sequential::commit_statistics(const Trace& trace) {
  if (trace.caches.size() != layers_.size()) throw ContractError("commit_statistics: trace/layer count mismatch");
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->update_statistics(trace.caches[i]);
}

void Sequential::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : layers_) l->initialize(rng);
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_)
    for (auto& p : l->parameters()) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Sequential::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_)
    for (const auto& p : l->parameters()) out.push_back(&p);
  return out;
}

nlohmann::json Sequential::descriptor() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : layers_) arr.push_back(l->config());
  return arr;
}

}  // namespace s2p::nn
