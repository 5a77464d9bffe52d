#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/data/normalization.hpp"
#include "s2p/data/profile.hpp"
#include "s2p/eval/report.hpp"
#include "s2p/model/arch.hpp"
#include "s2p/model/s2p_model.hpp"
#include "s2p/train/trainer.hpp"

namespace s2p::eval {

/// Where a site's households come from: a synthetic preset (optionally
/// with parameter overrides) or a CSV site manifest.
struct SiteSource {
  std::string preset = "hot";
  std::map<std::string, std::string> overrides;
  std::string manifest;
  int users = 25;
  int days = 30;

  /// Preset name or manifest path.
  std::string name() const;
  /// Households at `interval_minutes` (manifests are downsampled).
  std::vector<data::Household> load(int interval_minutes) const;
};

void to_json(nlohmann::json& j, const SiteSource& s);
/// Accepts a bare string (preset name, or a path ending in .json) or an object.
void from_json(const nlohmann::json& j, SiteSource& s);

/// Everything one train-and-evaluate run depends on.
struct ExperimentConfig {
  model::ArchConfig arch;
  train::TrainConfig train;
  SiteSource train_site;
  /// Named transfer sites; other site names are taken as presets or manifests.
  std::map<std::string, SiteSource> sites;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 7;
  int transfer_users = 5;
  int interval_minutes = 15;
  /// Window half-width as a duration; overrides arch.window_length.
  std::optional<double> window_hours;
  bool augment = false;
  bool fine_tune = false;
  int fine_tune_days = 7;
  /// Defaults to fine_tune_days when fine-tuning is part of the experiment.
  std::optional<int> eval_from_day;
  double epsilon = 0.005;
  NeeMode nee_mode = NeeMode::hourly;
  std::uint64_t seed = 1;

  void validate() const;
  /// Source of an evaluation site by name.
  SiteSource site(const std::string& name) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Window length covering +-`hours` at `interval_minutes`.
std::size_t window_length_for(double hours, int interval_minutes);

/// Training users, held-out users and the normalization fitted on the
/// (possibly augmented) training set.
struct TrainingData {
  std::vector<data::Household> train;
  std::vector<data::Household> test;
  data::NormalizationSpec normalization;
};

TrainingData prepare_training_data(const ExperimentConfig& cfg);
TrainingData prepare_training_data(const ExperimentConfig& cfg, std::vector<data::Household> site_households);

/// Builds and trains a model on `data.train`. Initialization and shuffling
/// seeds are derived from `seed`.
model::S2PModel train_model(const ExperimentConfig& cfg, const TrainingData& data, std::uint64_t seed,
                            std::vector<train::EpochRecord>* history = nullptr);

/// Scores `model` on `households`, fine-tuning first when cfg.fine_tune
/// (per household or per site following cfg.train.fine_tune_scope).
EvalReport evaluate_with_config(const ExperimentConfig& cfg, const model::S2PModel& model,
                                std::span<const data::Household> households);

/// One point of an experiment grid.
struct Cell {
  std::size_t layers = 5;
  bool dropout = true;
  std::size_t channels = 2;
  bool augment = false;
  int granularity = 15;
  std::size_t window_length = 33;
  std::string site;
  bool fine_tune = false;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  std::string label() const;
};

/// A base configuration plus axes; cells are the cartesian product of the
/// axis values, axes taken in name order with the last varying fastest.
/// Axes: layers, dropout, channels, augment, granularity, window_length,
/// window_hours, site, fine_tune, seed.
struct MatrixSpec {
  std::string name = "matrix";
  ExperimentConfig base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

  static MatrixSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<Cell> expand_cells(const MatrixSpec& spec);

/// `base` with one cell's values applied.
ExperimentConfig resolve_cell(const MatrixSpec& spec, const Cell& cell);

/// Cells sharing a key share a trained model.
std::string training_key(const ExperimentConfig& cfg);
/// Seed of the model trained for `cfg`: depends only on the training key.
std::uint64_t model_seed(const ExperimentConfig& cfg);

struct CellResult {
  Cell cell;
  EvalReport report;
  std::vector<train::EpochRecord> history;
};

struct MatrixOptions {
  unsigned threads = 1;
  std::function<void(const std::string&)> log;
};

/// Trains each distinct model once and evaluates every cell. Results come
/// back in cell order and do not depend on thread count or cell order.
std::vector<CellResult> run_matrix(const MatrixSpec& spec, const MatrixOptions& options = {});

/// One row per cell with the axis values and summary statistics.
void write_matrix_summary(const std::filesystem::path& path, const std::vector<CellResult>& results,
                          const std::vector<std::string>& comment_lines = {});

}  // namespace s2p::eval
