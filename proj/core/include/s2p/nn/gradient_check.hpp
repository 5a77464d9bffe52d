#pragma once

#include <cstdint>
#include <string>

#include "s2p/nn/layer.hpp"
#include "s2p/nn/sequential.hpp"

namespace s2p::nn {

struct GradCheckOptions {
  Mode mode = Mode::train;
  /// Seeds dropout masks (fixed across all perturbed evaluations) and the
  /// random projection used as the scalar objective for single layers.
  std::uint64_t seed = 17;
  /// 0 checks every coordinate; otherwise a seeded sample per tensor.
  std::size_t max_coords_per_tensor = 0;
  bool check_input = true;
  /// Network checks only: skip coordinates whose +-step perturbation flips
  /// the sign of any ReLU input, since the difference quotient straddles a
  /// kink there.
  bool skip_kinks = true;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_coordinate;
  std::size_t coordinates_checked = 0;
  std::size_t coordinates_skipped = 0;
};

/// Central finite differences against the analytic backward pass, for the
/// scalar objective sum(R * layer(x)) with a fixed random R. Relative error
/// per coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport gradient_check(const Layer& layer, const Tensor& input, double step, const GradCheckOptions& options = {});

/// Same check for a whole stack under the MSE objective against `target`.
GradCheckReport gradient_check(const Sequential& net, const Tensor& input, const Tensor& target, double step,
                               const GradCheckOptions& options = {});

}  // namespace s2p::nn
