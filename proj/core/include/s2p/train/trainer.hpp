#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/data/windows.hpp"
#include "s2p/model/s2p_model.hpp"
#include "s2p/nn/sequential.hpp"

namespace s2p::train {

enum class FineTuneScope { household, site };

std::string_view to_string(FineTuneScope s);
FineTuneScope parse_fine_tune_scope(std::string_view s);

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 1000;
  double learning_rate = 0.005;
  std::uint64_t seed = 1;
  /// Windows drawn (without replacement) for each epoch; 0 uses them all.
  std::size_t samples_per_epoch = 0;

  int fine_tune_epochs = 15;
  double fine_tune_learning_rate = 0.001;
  FineTuneScope fine_tune_scope = FineTuneScope::household;
  /// Whether the first block's batch norm is retrained with its conv.
  bool include_first_bn = true;
  /// Batch-norm normalization while fine-tuning. `frozen` keeps every
  /// running statistic fixed so untouched layers stay exactly as loaded.
  nn::BatchStatistics fine_tune_statistics = nn::BatchStatistics::frozen;

  /// Throws ConfigError. Zero epochs and zero learning rates are allowed.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Plain mini-batch training of every trainable parameter with ADAM on the
/// mean squared error. Each epoch visits the windows in a fresh order
/// seeded by (seed, epoch); the last short batch is kept. Throws
/// DataError on an empty set and NumericError, naming epoch and batch, on
/// a non-finite loss.
TrainResult train(model::S2PModel& model, const data::WindowSet& windows, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Retrains only the first conv block and the output layer with the
/// fine-tuning epochs and learning rate; every other parameter stays
/// bit-identical. The trainable flags are left in that state.
TrainResult fine_tune(model::S2PModel& model, const data::WindowSet& windows, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = {});

/// Freezes all parameters, then unfreezes the fine-tuning set.
void apply_fine_tune_freeze(model::S2PModel& model, bool include_first_bn);

/// Mean squared error in infer mode over the whole set.
double evaluate_loss(const model::S2PModel& model, const data::WindowSet& windows, std::size_t batch_size = 1024);

/// CSV with header `epoch,mean_loss,wall_seconds`, preceded by `# ` comment
/// lines.
void write_run_log(const std::filesystem::path& path, const std::vector<EpochRecord>& history,
                   const std::vector<std::string>& comment_lines = {});

}  // namespace s2p::train
