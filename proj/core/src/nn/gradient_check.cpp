#include "s2p/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>

#include "s2p/nn/loss.hpp"

namespace s2p::nn {

namespace {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::vector<std::size_t> pick_coordinates(std::size_t size, std::size_t max_coords, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (max_coords == 0 || size <= max_coords) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(max_coords);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Objective value, or nothing when the evaluation point is not in the
/// same smooth piece as the unperturbed one.
using Objective = std::function<std::optional<double>()>;

/// Perturbs each selected coordinate of `values` and compares the central
/// difference of `objective` with `analytic`.
void check_tensor(const std::string& label, std::span<double> values, const Tensor& analytic, double step,
                  std::size_t max_coords, std::mt19937_64& rng, const Objective& objective,
                  GradCheckReport& report) {
  for (std::size_t i : pick_coordinates(values.size(), max_coords, rng)) {
    const double original = values[i];
    values[i] = original + step;
    const std::optional<double> plus = objective();
    values[i] = original - step;
    const std::optional<double> minus = objective();
    values[i] = original;
    if (!plus || !minus) {
      ++report.coordinates_skipped;
      continue;
    }
    const double numeric = (*plus - *minus) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    ++report.coordinates_checked;
    if (report.worst_coordinate.empty() || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_coordinate = label + "[" + std::to_string(i) + "]";
    }
  }
}

/// Sign of every ReLU input recorded in a trace.
std::vector<bool> relu_pattern(const Sequential& net, const Trace& trace) {
  std::vector<bool> out;
  for (std::size_t l = 0; l < net.size() && l < trace.caches.size(); ++l) {
    if (net.layer(l).kind() != LayerKind::relu) continue;
    for (double v : trace.caches[l].saved.at(0).data()) out.push_back(v > 0.0);
  }
  return out;
}

}  // namespace

GradCheckReport gradient_check(const Layer& layer, const Tensor& input, double step, const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  const ForwardResult base = layer.forward(input, options.mode, options.seed);
  Tensor projection(base.output.shape());
  for (double& v : projection.data()) v = 2.0 * uniform01(rng) - 1.0;

  const BackwardResult analytic = layer.backward(base.cache, projection);

  std::unique_ptr<Layer> probe = layer.clone();
  Tensor x = input;
  const Objective objective = [&]() -> std::optional<double> {
    const Tensor y = probe->forward(x, options.mode, options.seed).output;
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += projection[i] * y[i];
    return s;
  };

  GradCheckReport report;
  auto& params = probe->parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    check_tensor(params[p].name, params[p].value.data(), analytic.param_grads.at(p), step,
                 options.max_coords_per_tensor, rng, objective, report);
  }
  if (options.check_input) {
    check_tensor(layer.name() + ".input", x.data(), analytic.input_grad, step, options.max_coords_per_tensor, rng,
                 objective, report);
  }
  return report;
}

GradCheckReport gradient_check(const Sequential& net, const Tensor& input, const Tensor& target, double step,
                               const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  const ForwardOptions fwd{options.mode, options.seed, BatchStatistics::batch};
  Trace trace;
  const Tensor out = net.forward(input, fwd, &trace);
  const LossResult loss = mse_loss(out, target);
  const Sequential::Gradients analytic = net.backward(trace, loss.grad);

  const std::vector<bool> pattern = relu_pattern(net, trace);

  Sequential probe = net;
  Tensor x = input;
  const Objective objective = [&]() -> std::optional<double> {
    Trace t;
    const Tensor y = probe.forward(x, fwd, options.skip_kinks ? &t : nullptr);
    if (options.skip_kinks && relu_pattern(probe, t) != pattern) return std::nullopt;
    return mse_loss(y, target).loss;
  };

  GradCheckReport report;
  for (std::size_t l = 0; l < probe.size(); ++l) {
    auto& params = probe.layer(l).parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      check_tensor(params[p].name, params[p].value.data(), analytic.params[l].at(p), step,
                   options.max_coords_per_tensor, rng, objective, report);
    }
  }
  if (options.check_input) {
    check_tensor("input", x.data(), analytic.input_grad, step, options.max_coords_per_tensor, rng, objective, report);
  }
  return report;
}

}  // namespace s2p::nn
