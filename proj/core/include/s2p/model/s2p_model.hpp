#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/data/normalization.hpp"
#include "s2p/data/profile.hpp"
#include "s2p/data/windows.hpp"
#include "s2p/model/arch.hpp"
#include "s2p/nn/sequential.hpp"

namespace s2p::model {

/// A built network together with everything needed to apply it to new
/// data: its architecture, the normalization it was trained under and the
/// sampling interval of its training data.
struct S2PModel {
  ArchConfig arch;
  nn::Sequential net;
  data::NormalizationSpec normalization;
  int interval_minutes = 15;
  /// Free-form run information (configuration, seeds).
  nlohmann::json metadata = nlohmann::json::object();

  /// conv{i} -> bn{i} -> relu{i} blocks, optional dropout, flatten, hidden
  /// dense + relu layers, fc_out. Initialization depends only on `seed`.
  static S2PModel build(const ArchConfig& arch, std::uint64_t seed);

  std::size_t half_width() const { return arch.half_width(); }
};

/// Raw outputs for an (n, 1, channels, window_length) batch, in infer mode.
std::vector<double> predict(const S2PModel& model, const nn::Tensor& batch);

/// Raw output for one window (may be negative or above the total).
double predict_point(const S2PModel& model, const data::WindowSample& sample);

/// Clamp a raw prediction into [0, total]: the total when the raw value
/// reaches it, zero below `epsilon`, otherwise the raw value.
double postprocess(double raw, double total, double epsilon);

struct ClampStats {
  std::size_t points = 0;
  std::size_t capped = 0;  ///< raw >= total
  std::size_t zeroed = 0;  ///< raw < epsilon
};

/// Post-processed HVAC estimate (per unit) at every time index of a
/// normalized household. The household's HVAC label, if any, is ignored.
data::Profile disaggregate_series(const S2PModel& model, const data::Household& normalized, double epsilon,
                                  ClampStats* stats = nullptr, std::size_t batch_size = 1024);

/// Picks layers by (layer, position).
using LayerSelector = std::function<bool(const nn::Layer&, std::size_t)>;

LayerSelector all_layers();
/// The first conv layer, plus its batch norm when `include_bn`.
LayerSelector first_conv_block(bool include_bn = true);
/// The output dense layer.
LayerSelector last_dense();
LayerSelector any_of(std::vector<LayerSelector> selectors);

/// Sets the trainable flag on every parameter of the selected layers and
/// returns how many parameters were touched. Throws ContractError when the
/// selector matches no layer with parameters.
std::size_t set_trainable(nn::Sequential& net, const LayerSelector& selector, bool flag);

std::vector<std::string> trainable_parameter_names(const nn::Sequential& net);

/// Builds the (n, 1, channels, L) input for a list of samples.
nn::Tensor stack_samples(std::span<const data::WindowSample> samples, std::size_t channels);

}  // namespace s2p::model
