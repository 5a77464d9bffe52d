#include "s2p/model/arch.hpp"

#include <string>

#include "s2p/error.hpp"

namespace s2p::model {

std::string_view to_string(DropoutPlacement p) {
  return p == DropoutPlacement::after_conv ? "after_conv" : "before_output";
}

DropoutPlacement parse_dropout_placement(std::string_view s) {
  if (s == "after_conv") return DropoutPlacement::after_conv;
  if (s == "before_output") return DropoutPlacement::before_output;
  throw ConfigError("unknown dropout placement '" + std::string(s) + "' (expected after_conv or before_output)");
}

void ArchConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("architecture: " + what); };
  if (n_conv_layers < 1) fail("at least one conv layer is required");
  if (input_channels != 1 && input_channels != 2) fail("input_channels must be 1 or 2");
  if (window_length < 3 || window_length % 2 == 0) fail("window_length must be odd and >= 3");
  if (filters.size() != n_conv_layers || kernel_widths.size() != n_conv_layers || strides.size() != n_conv_layers) {
    fail("filters, kernel_widths and strides need " + std::to_string(n_conv_layers) + " entries each");
  }
  for (std::size_t i = 0; i < n_conv_layers; ++i) {
    if (filters[i] == 0 || kernel_widths[i] == 0 || strides[i] == 0) {
      fail("conv layer " + std::to_string(i + 1) + " has a zero filter count, kernel width or stride");
    }
  }
  for (std::size_t w : fc_widths) {
    if (w == 0) fail("hidden dense widths must be positive");
  }
  if (use_dropout && !(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (use_dropout && dropout_placement == DropoutPlacement::before_output && fc_widths.empty()) {
    fail("dropout before the output needs a hidden dense layer");
  }
}

ArchConfig ArchConfig::with_layers(std::size_t n) const {
  if (n < 1) throw ConfigError("architecture: at least one conv layer is required");
  validate();
  ArchConfig out = *this;
  auto drop_middle = [](std::vector<std::size_t>& v) { v.erase(v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2)); };
  auto dup_middle = [](std::vector<std::size_t>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    v.insert(mid, *mid);
  };
  while (out.n_conv_layers > n) {
    drop_middle(out.filters);
    drop_middle(out.kernel_widths);
    drop_middle(out.strides);
    --out.n_conv_layers;
  }
  while (out.n_conv_layers < n) {
    dup_middle(out.filters);
    dup_middle(out.kernel_widths);
    dup_middle(out.strides);
    ++out.n_conv_layers;
  }
  return out;
}

void to_json(nlohmann::json& j, const ArchConfig& a) {
  j = nlohmann::json{
      {"n_conv_layers", a.n_conv_layers},
      {"input_channels", a.input_channels},
      {"window_length", a.window_length},
      {"filters", a.filters},
      {"kernel_widths", a.kernel_widths},
      {"strides", a.strides},
      {"fc_widths", a.fc_widths},
      {"use_dropout", a.use_dropout},
      {"dropout_rate", a.dropout_rate},
      {"dropout_placement", std::string(to_string(a.dropout_placement))},
  };
}

void from_json(const nlohmann::json& j, ArchConfig& a) {
  if (!j.is_object()) throw ConfigError("architecture must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_conv_layers") a.n_conv_layers = value.get<std::size_t>();
      else if (key == "input_channels") a.input_channels = value.get<std::size_t>();
      else if (key == "window_length") a.window_length = value.get<std::size_t>();
      else if (key == "filters") a.filters = value.get<std::vector<std::size_t>>();
      else if (key == "kernel_widths") a.kernel_widths = value.get<std::vector<std::size_t>>();
      else if (key == "strides") a.strides = value.get<std::vector<std::size_t>>();
      else if (key == "fc_widths") a.fc_widths = value.get<std::vector<std::size_t>>();
      else if (key == "use_dropout") a.use_dropout = value.get<bool>();
      else if (key == "dropout_rate") a.dropout_rate = value.get<double>();
      else if (key == "dropout_placement") a.dropout_placement = parse_dropout_placement(value.get<std::string>());
      else throw ConfigError("architecture: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("architecture: ") + e.what());
  }
}

}  // namespace s2p::model
