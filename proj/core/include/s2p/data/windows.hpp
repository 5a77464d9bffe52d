#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2p/data/profile.hpp"
#include "s2p/nn/tensor.hpp"

namespace s2p::data {

/// Model input around time t: load and temperature over [t-K, t+K], the
/// HVAC target at t, and the total load at t (the post-processing bound).
struct WindowSample {
  std::vector<double> load_window;
  std::vector<double> temp_window;
  double target = 0.0;
  double center_total = 0.0;
};

/// One sample per time index; positions past either end replicate the
/// edge value. Requires a normalized household; the target is 0 when the
/// household is unlabeled.
std::vector<WindowSample> make_windows(const Household& h, std::size_t half_width);

/// Window samples over many households without materializing every
/// window. Index i addresses (series, t) pairs in insertion order.
class WindowSet {
 public:
  explicit WindowSet(std::size_t half_width);

  /// Adds every time index of a normalized household.
  void add(const Household& h);
  /// Adds pre-built samples (each kept as its own window-length series).
  void add(std::span<const WindowSample> samples);

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  std::size_t half_width() const { return half_width_; }
  std::size_t window_length() const { return 2 * half_width_ + 1; }

  WindowSample sample(std::size_t i) const;

  /// Fills `input` as (n, 1, channels, window_length) with the load row
  /// first and, for two channels, the temperature row second; `target` as
  /// (n, 1). `center_total` receives the total load at each centre.
  void gather(std::span<const std::size_t> indices, std::size_t channels, nn::Tensor& input, nn::Tensor* target,
              std::vector<double>* center_total = nullptr) const;

  /// Every index in order.
  std::vector<std::size_t> all_indices() const;

 private:
  struct Series {
    std::vector<double> load;
    std::vector<double> temp;
    std::vector<double> target;
  };
  struct Ref {
    std::uint32_t series;
    std::uint32_t t;
  };

  std::size_t half_width_;
  std::vector<Series> series_;
  std::vector<Ref> index_;
};

}  // namespace s2p::data
