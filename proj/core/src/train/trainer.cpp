#include "s2p/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "s2p/data/csv_io.hpp"
#include "s2p/error.hpp"
#include "s2p/nn/adam.hpp"
#include "s2p/nn/loss.hpp"
#include "s2p/util/seed.hpp"

namespace s2p::train {

namespace {

nn::BatchStatistics parse_statistics(std::string_view s) {
  if (s == "batch") return nn::BatchStatistics::batch;
  if (s == "frozen_if_untrainable") return nn::BatchStatistics::frozen_if_untrainable;
  if (s == "frozen") return nn::BatchStatistics::frozen;
  throw ConfigError("unknown batch-norm statistics mode '" + std::string(s) + "'");
}

std::string_view statistics_name(nn::BatchStatistics s) {
  switch (s) {
    case nn::BatchStatistics::batch: return "batch";
    case nn::BatchStatistics::frozen_if_untrainable: return "frozen_if_untrainable";
    case nn::BatchStatistics::frozen: return "frozen";
  }
  return "batch";
}

TrainResult run_epochs(model::S2PModel& model, const data::WindowSet& windows, int epochs, double lr,
                       std::size_t batch_size, std::size_t samples_per_epoch, std::uint64_t seed,
                       nn::BatchStatistics statistics, const EpochCallback& on_epoch) {
  if (windows.empty()) throw DataError("training set is empty");
  if (windows.window_length() != model.arch.window_length) {
    throw ShapeError("training windows have length " + std::to_string(windows.window_length()) + ", model expects " +
                     std::to_string(model.arch.window_length));
  }
  const std::vector<nn::Parameter*> params = model.net.parameters();
  nn::AdamState adam = nn::AdamState::for_parameters(params);
  std::vector<nn::Tensor> flat(params.size());

  const std::vector<std::size_t> ordered = windows.all_indices();
  std::vector<std::size_t> order;
  nn::Tensor input, target;
  TrainResult result;
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed({seed, static_cast<std::uint64_t>(epoch)});
    order = ordered;
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (samples_per_epoch > 0 && samples_per_epoch < order.size()) order.resize(samples_per_epoch);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size, ++batch_index) {
      const std::size_t n = std::min(batch_size, order.size() - first);
      windows.gather(std::span(order).subspan(first, n), model.arch.input_channels, input, &target);

      const nn::ForwardOptions opts{nn::Mode::train, nn::derive_seed(epoch_seed, batch_index), statistics};
      nn::Trace trace;
      const nn::Tensor out = model.net.forward(input, opts, &trace);
      const nn::LossResult loss = nn::mse_loss(out, target);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      nn::Sequential::Gradients grads = model.net.backward(trace, loss.grad);
      std::size_t k = 0;
      for (auto& layer_grads : grads.params)
        for (auto& g : layer_grads) flat[k++] = std::move(g);
      nn::adam_step(params, flat, adam, lr);
      model.net.commit_statistics(trace);
      loss_sum += loss.loss * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.mean_loss = loss_sum / static_cast<double>(order.size());
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace

std::string_view to_string(FineTuneScope s) { return s == FineTuneScope::household ? "household" : "site"; }

FineTuneScope parse_fine_tune_scope(std::string_view s) {
  if (s == "household") return FineTuneScope::household;
  if (s == "site") return FineTuneScope::site;
  throw ConfigError("unknown fine-tune scope '" + std::string(s) + "' (expected household or site)");
}

void TrainConfig::validate() const {
  if (epochs < 0 || fine_tune_epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !(fine_tune_learning_rate >= 0.0) || !std::isfinite(learning_rate) ||
      !std::isfinite(fine_tune_learning_rate)) {
    throw ConfigError("learning rates must be finite and >= 0");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"seed", c.seed},
      {"samples_per_epoch", c.samples_per_epoch},
      {"fine_tune_epochs", c.fine_tune_epochs},
      {"fine_tune_learning_rate", c.fine_tune_learning_rate},
      {"fine_tune_scope", std::string(to_string(c.fine_tune_scope))},
      {"include_first_bn", c.include_first_bn},
      {"fine_tune_statistics", std::string(statistics_name(c.fine_tune_statistics))},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("training configuration must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "samples_per_epoch") c.samples_per_epoch = value.get<std::size_t>();
      else if (key == "fine_tune_epochs") c.fine_tune_epochs = value.get<int>();
      else if (key == "fine_tune_learning_rate") c.fine_tune_learning_rate = value.get<double>();
      else if (key == "fine_tune_scope") c.fine_tune_scope = parse_fine_tune_scope(value.get<std::string>());
      else if (key == "include_first_bn") c.include_first_bn = value.get<bool>();
      else if (key == "fine_tune_statistics") c.fine_tune_statistics = parse_statistics(value.get<std::string>());
      else throw ConfigError("training configuration: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training configuration: ") + e.what());
  }
}

TrainResult train(model::S2PModel& model, const data::WindowSet& windows, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  return run_epochs(model, windows, cfg.epochs, cfg.learning_rate, cfg.batch_size, cfg.samples_per_epoch, cfg.seed,
                    nn::BatchStatistics::batch, on_epoch);
}

void apply_fine_tune_freeze(model::S2PModel& model, bool include_first_bn) {
  model::set_trainable(model.net, model::all_layers(), false);
  model::set_trainable(model.net, model::any_of({model::first_conv_block(include_first_bn), model::last_dense()}), true);
}

TrainResult fine_tune(model::S2PModel& model, const data::WindowSet& windows, const TrainConfig& cfg,
                      const EpochCallback& on_epoch) {
  cfg.validate();
  if (windows.empty()) throw DataError("fine-tuning set is empty");
  apply_fine_tune_freeze(model, cfg.include_first_bn);
  return run_epochs(model, windows, cfg.fine_tune_epochs, cfg.fine_tune_learning_rate, cfg.batch_size,
                    cfg.samples_per_epoch, mix_seed(cfg.seed, "fine_tune"), cfg.fine_tune_statistics, on_epoch);
}

double evaluate_loss(const model::S2PModel& model, const data::WindowSet& windows, std::size_t batch_size) {
  if (windows.empty()) throw DataError("evaluation set is empty");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  double sum = 0.0;
  std::vector<std::size_t> idx;
  nn::Tensor input, target;
  for (std::size_t first = 0; first < windows.size(); first += batch_size) {
    const std::size_t n = std::min(batch_size, windows.size() - first);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), first);
    windows.gather(idx, model.arch.input_channels, input, &target);
    const std::vector<double> pred = model::predict(model, input);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pred[i] - target[i];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(windows.size());
}

void write_run_log(const std::filesystem::path& path, const std::vector<EpochRecord>& history,
                   const std::vector<std::string>& comment_lines) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& line : comment_lines) f << "# " << line << '\n';
  f << "epoch,mean_loss,wall_seconds\n";
  for (const auto& r : history) {
    f << r.epoch << ',' << data::format_fixed(r.mean_loss, 12) << ',' << data::format_fixed(r.wall_seconds, 3) << '\n';
  }
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace s2p::train
