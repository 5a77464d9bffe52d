#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace s2p::model {

enum class DropoutPlacement {
  after_conv,     ///< between the last conv block and flatten
  before_output,  ///< between the last hidden dense layer and the output
};

std::string_view to_string(DropoutPlacement p);
DropoutPlacement parse_dropout_placement(std::string_view s);

/// Shape of the CNN. The input is one (input_channels x window_length)
/// plane: the first kernel spans every row, so load and temperature are
/// mixed from the first layer on. Later kernels are 1 x width. Every conv
/// keeps the window length (stride 1) or divides it by its stride.
struct ArchConfig {
  std::size_t n_conv_layers = 5;
  std::size_t input_channels = 2;
  std::size_t window_length = 33;
  std::vector<std::size_t> filters{30, 30, 40, 50, 50};
  std::vector<std::size_t> kernel_widths{10, 8, 6, 5, 5};
  std::vector<std::size_t> strides{1, 1, 1, 1, 1};
  std::vector<std::size_t> fc_widths{1024};
  bool use_dropout = true;
  double dropout_rate = 0.4;
  DropoutPlacement dropout_placement = DropoutPlacement::after_conv;

  /// Throws ConfigError on inconsistent dimensions.
  void validate() const;

  /// Same stack with `n` conv blocks: the middle block is dropped or
  /// duplicated until the count matches.
  ArchConfig with_layers(std::size_t n) const;

  /// (window_length - 1) / 2.
  std::size_t half_width() const { return (window_length - 1) / 2; }

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

void to_json(nlohmann::json& j, const ArchConfig& a);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, ArchConfig& a);

}  // namespace s2p::model
