#include "s2p/data/windows.hpp"

#include <algorithm>
#include <numeric>

#include "s2p/error.hpp"

namespace s2p::data {

namespace {

void require_normalized(const Household& h) {
  if (h.total.unit != Unit::per_unit || h.temperature.unit != Unit::normalized) {
    throw DataError("household '" + h.user_id + "' must be normalized before windowing");
  }
  if (h.total.empty()) throw DataError("household '" + h.user_id + "' has an empty profile");
  if (h.temperature.size() != h.total.size() || (h.hvac && h.hvac->size() != h.total.size())) {
    throw DataError("household '" + h.user_id + "' profiles differ in length");
  }
}

inline std::size_t clamp_index(std::ptrdiff_t t, std::size_t len) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(len) - 1));
}

}  // namespace

std::vector<WindowSample> make_windows(const Household& h, std::size_t half_width) {
  if (half_width < 1) throw ConfigError("make_windows: K must be at least 1");
  WindowSet set(half_width);
  set.add(h);
  std::vector<WindowSample> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) out.push_back(set.sample(i));
  return out;
}

WindowSet::WindowSet(std::size_t half_width) : half_width_(half_width) {
  if (half_width_ < 1) throw ConfigError("WindowSet: K must be at least 1");
}

void WindowSet::add(const Household& h) {
  require_normalized(h);
  Series s;
  s.load = h.total.values;
  s.temp = h.temperature.values;
  s.target = h.hvac ? h.hvac->values : std::vector<double>(h.size(), 0.0);
  const auto id = static_cast<std::uint32_t>(series_.size());
  series_.push_back(std::move(s));
  for (std::size_t t = 0; t < h.size(); ++t) index_.push_back({id, static_cast<std::uint32_t>(t)});
}

void WindowSet::add(std::span<const WindowSample> samples) {
  const std::size_t len = window_length();
  for (const WindowSample& w : samples) {
    if (w.load_window.size() != len || w.temp_window.size() != len) {
      throw ShapeError("WindowSet: sample window length " + std::to_string(w.load_window.size()) + " != " +
                       std::to_string(len));
    }
    if (w.load_window[half_width_] != w.center_total) {
      throw DataError("WindowSet: sample centre total differs from the centre of its load window");
    }
    Series s;
    s.load = w.load_window;
    s.temp = w.temp_window;
    s.target.assign(len, 0.0);
    s.target[half_width_] = w.target;
    const auto id = static_cast<std::uint32_t>(series_.size());
    series_.push_back(std::move(s));
    index_.push_back({id, static_cast<std::uint32_t>(half_width_)});
  }
}

WindowSample WindowSet::sample(std::size_t i) const {
  const Ref r = index_.at(i);
  const Series& s = series_[r.series];
  const std::size_t len = s.load.size();
  WindowSample w;
  w.load_window.resize(window_length());
  w.temp_window.resize(window_length());
  for (std::size_t k = 0; k < window_length(); ++k) {
    const std::size_t src = clamp_index(static_cast<std::ptrdiff_t>(r.t) + static_cast<std::ptrdiff_t>(k) -
                                            static_cast<std::ptrdiff_t>(half_width_),
                                        len);
    w.load_window[k] = s.load[src];
    w.temp_window[k] = s.temp[src];
  }
  w.target = s.target[r.t];
  w.center_total = s.load[r.t];
  return w;
}

void WindowSet::gather(std::span<const std::size_t> indices, std::size_t channels, nn::Tensor& input,
                       nn::Tensor* target, std::vector<double>* center_total) const {
  if (channels != 1 && channels != 2) throw ConfigError("WindowSet::gather: channels must be 1 or 2");
  const std::size_t n = indices.size();
  const std::size_t len = window_length();
  const nn::Shape in_shape{n, 1, channels, len};
  if (input.shape() != in_shape) input = nn::Tensor(in_shape);
  if (target && target->shape() != nn::Shape{n, 1}) *target = nn::Tensor({n, 1});
  if (center_total) center_total->resize(n);

  double* x = input.data().data();
  for (std::size_t b = 0; b < n; ++b) {
    const Ref r = index_.at(indices[b]);
    const Series& s = series_[r.series];
    const std::size_t series_len = s.load.size();
    double* load_row = x + b * channels * len;
    double* temp_row = load_row + len;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t src = clamp_index(static_cast<std::ptrdiff_t>(r.t) + static_cast<std::ptrdiff_t>(k) -
                                              static_cast<std::ptrdiff_t>(half_width_),
                                          series_len);
      load_row[k] = s.load[src];
      if (channels == 2) temp_row[k] = s.temp[src];
    }
    if (target) (*target)[b] = s.target[r.t];
    if (center_total) (*center_total)[b] = s.load[r.t];
  }
}

std::vector<std::size_t> WindowSet::all_indices() const {
  std::vector<std::size_t> idx(size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace s2p::data
