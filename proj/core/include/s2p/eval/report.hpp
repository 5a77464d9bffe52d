#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/data/normalization.hpp"
#include "s2p/data/profile.hpp"
#include "s2p/eval/metrics.hpp"
#include "s2p/model/s2p_model.hpp"

namespace s2p::eval {

inline constexpr std::string_view kReportSchema = "s2p-eval-report";
inline constexpr int kReportVersion = 1;

struct UserReport {
  std::string user_id;
  std::int64_t start_time = 0;  ///< first scored sample, unix seconds
  double p_rated = 0.0;         ///< per unit
  double nmae_percent = 0.0;
  double nee_percent = 0.0;
  std::vector<double> hourly_nee_percent;
  std::vector<double> daily_nmae_percent;
  model::ClampStats clamp;
  std::size_t clipped = 0;  ///< inputs pulled back into [0, 1] by normalization
};

struct EvalReport {
  /// Experiment description: variant, site, granularity, window length,
  /// run configuration and seeds.
  nlohmann::json metadata = nlohmann::json::object();
  double epsilon = 0.0;
  int interval_minutes = 0;
  int from_day = 0;
  NeeMode nee_mode = NeeMode::hourly;
  std::vector<UserReport> users;
  Summary nmae;
  Summary nee;
};

struct EvalOptions {
  double epsilon = 0.005;
  NeeMode nee_mode = NeeMode::hourly;
  /// Days at the start of each series left out of scoring (they still feed
  /// the input windows), e.g. the days used for fine-tuning.
  int from_day = 0;
};

/// Produces a per-unit HVAC estimate for normalized household `index`
/// and reports how the clamp treated it.
using Predictor = std::function<data::Profile(std::size_t index, const data::Household& normalized,
                                              model::ClampStats& stats)>;

/// Normalizes each labeled kW household with `spec`, asks `predict` for an
/// estimate and scores it against the label.
EvalReport evaluate_predictions(std::span<const data::Household> households, const data::NormalizationSpec& spec,
                                const Predictor& predict, const EvalOptions& options);

/// evaluate_predictions with the model's sliding-window disaggregation.
EvalReport evaluate_site(const model::S2PModel& model, std::span<const data::Household> households,
                         const EvalOptions& options);

/// Returns the label itself; scores 0 everywhere.
Predictor oracle_predictor();
/// Predicts no HVAC at all.
Predictor zero_predictor();
Predictor model_predictor(const model::S2PModel& model, double epsilon);

nlohmann::json report_to_json(const EvalReport& report);
void write_report_json(const std::filesystem::path& path, const EvalReport& report);
/// `hour_of_day,user_id,nEE_percent`, one row per scored hour.
void write_hourly_csv(const std::filesystem::path& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines = {});
/// `user_id,day,nMAE_percent`, one row per scored day.
void write_daily_csv(const std::filesystem::path& path, const EvalReport& report,
                     const std::vector<std::string>& comment_lines = {});

}  // namespace s2p::eval
