#include "s2p/model/s2p_model.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "s2p/error.hpp"

namespace s2p::model {

namespace {

nn::Padding same_width_padding(std::size_t width, std::size_t kernel, std::size_t stride) {
  const std::size_t out = (width + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + kernel;
  const std::size_t total = needed > width ? needed - width : 0;
  return nn::Padding{0, 0, total / 2, total - total / 2};
}

}  // namespace

S2PModel S2PModel::build(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  S2PModel m;
  m.arch = arch;
  nn::Sequential& net = m.net;

  std::size_t width = arch.window_length;
  std::size_t channels = 1;
  for (std::size_t i = 0; i < arch.n_conv_layers; ++i) {
    const std::string idx = std::to_string(i + 1);
    nn::Conv2dConfig cfg;
    cfg.in_channels = channels;
    cfg.out_channels = arch.filters[i];
    cfg.kernel_h = i == 0 ? arch.input_channels : 1;
    cfg.kernel_w = arch.kernel_widths[i];
    cfg.stride_w = arch.strides[i];
    cfg.padding = same_width_padding(width, cfg.kernel_w, cfg.stride_w);
    cfg.bias = false;
    net.add(std::make_unique<nn::Conv2d>("conv" + idx, cfg));
    net.add(std::make_unique<nn::BatchNorm>("bn" + idx, arch.filters[i]));
    net.add(std::make_unique<nn::Relu>("relu" + idx));
    channels = arch.filters[i];
    width = (width + arch.strides[i] - 1) / arch.strides[i];
  }
  const bool dropout = arch.use_dropout && arch.dropout_rate > 0.0;
  if (dropout && arch.dropout_placement == DropoutPlacement::after_conv) {
    net.add(std::make_unique<nn::Dropout>("dropout", arch.dropout_rate));
  }
  net.add(std::make_unique<nn::Flatten>("flatten"));
  std::size_t features = channels * width;
  for (std::size_t i = 0; i < arch.fc_widths.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    net.add(std::make_unique<nn::Dense>("fc" + idx, features, arch.fc_widths[i]));
    net.add(std::make_unique<nn::Relu>("relu_fc" + idx));
    features = arch.fc_widths[i];
  }
  if (dropout && arch.dropout_placement == DropoutPlacement::before_output) {
    net.add(std::make_unique<nn::Dropout>("dropout", arch.dropout_rate));
  }
  net.add(std::make_unique<nn::Dense>("fc_out", features, 1));

  const nn::Shape out = net.output_shape({1, 1, arch.input_channels, arch.window_length});
  if (out != nn::Shape{1, 1}) throw ConfigError("architecture does not reduce to one output per sample");
  net.initialize(seed);
  return m;
}

std::vector<double> predict(const S2PModel& model, const nn::Tensor& batch) {
  const nn::Shape expected{batch.rank() > 0 ? batch.dim(0) : 0, 1, model.arch.input_channels, model.arch.window_length};
  if (batch.shape() != expected) {
    throw ShapeError("predict: expected input " + nn::shape_string(expected) + ", got " + nn::shape_string(batch.shape()));
  }
  const nn::Tensor out = model.net.forward(batch, nn::ForwardOptions{nn::Mode::infer});
  return out.values();
}

nn::Tensor stack_samples(std::span<const data::WindowSample> samples, std::size_t channels) {
  if (samples.empty()) throw ShapeError("stack_samples: no samples");
  const std::size_t length = samples.front().load_window.size();
  nn::Tensor t({samples.size(), 1, channels, length});
  auto out = t.data();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.load_window.size() != length || (channels == 2 && s.temp_window.size() != length)) {
      throw ShapeError("stack_samples: sample " + std::to_string(i) + " has a different window length");
    }
    double* row = out.data() + i * channels * length;
    std::copy(s.load_window.begin(), s.load_window.end(), row);
    if (channels == 2) std::copy(s.temp_window.begin(), s.temp_window.end(), row + length);
  }
  return t;
}

double predict_point(const S2PModel& model, const data::WindowSample& sample) {
  if (sample.load_window.size() != model.arch.window_length) {
    throw ShapeError("predict_point: window length " + std::to_string(sample.load_window.size()) +
                     " does not match the model's " + std::to_string(model.arch.window_length));
  }
  return predict(model, stack_samples(std::span(&sample, 1), model.arch.input_channels)).front();
}

double postprocess(double raw, double total, double epsilon) {
  if (raw >= total) return total;
  if (raw >= epsilon) return raw;
  return 0.0;
}

data::Profile disaggregate_series(const S2PModel& model, const data::Household& normalized, double epsilon,
                                  ClampStats* stats, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("disaggregate_series: batch size must be positive");
  data::Household input = normalized;
  input.hvac.reset();
  data::WindowSet windows(model.half_width());
  windows.add(input);

  data::Profile out{std::vector<double>(windows.size()), normalized.total.interval_minutes, data::Unit::per_unit};
  std::vector<std::size_t> idx;
  nn::Tensor batch;
  std::vector<double> centre;
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, windows.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    windows.gather(idx, model.arch.input_channels, batch, nullptr, &centre);
    const std::vector<double> raw = predict(model, batch);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = postprocess(raw[i], centre[i], epsilon);
      out.values[start + i] = v;
      if (stats) {
        ++stats->points;
        if (raw[i] >= centre[i]) ++stats->capped;
        else if (raw[i] < epsilon) ++stats->zeroed;
      }
    }
  }
  return out;
}

LayerSelector all_layers() {
  return [](const nn::Layer&, std::size_t) { return true; };
}

LayerSelector first_conv_block(bool include_bn) {
  return [include_bn](const nn::Layer& l, std::size_t) { return l.name() == "conv1" || (include_bn && l.name() == "bn1"); };
}

LayerSelector last_dense() {
  return [](const nn::Layer& l, std::size_t) { return l.name() == "fc_out"; };
}

LayerSelector any_of(std::vector<LayerSelector> selectors) {
  return [selectors = std::move(selectors)](const nn::Layer& l, std::size_t i) {
    return std::any_of(selectors.begin(), selectors.end(), [&](const LayerSelector& s) { return s(l, i); });
  };
}

std::size_t set_trainable(nn::Sequential& net, const LayerSelector& selector, bool flag) {
  std::size_t touched = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    nn::Layer& l = net.layer(i);
    if (!selector(l, i)) continue;
    for (auto& p : l.parameters()) {
      p.trainable = flag;
      ++touched;
    }
  }
  if (touched == 0) throw ContractError("set_trainable: selector matched no layer with parameters");
  return touched;
}

std::vector<std::string> trainable_parameter_names(const nn::Sequential& net) {
  std::vector<std::string> names;
  for (const nn::Parameter* p : net.parameters()) {
    if (p->trainable) names.push_back(p->name);
  }
  return names;
}

}  // namespace s2p::model
