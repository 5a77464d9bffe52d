#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace s2p::eval {

/// Mean absolute error as a percentage of the rated HVAC power.
double nmae_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated);

struct NeeResult {
  /// One value per hour: |sum(pred) - sum(actual)| / (points_per_hour * p_rated), percent.
  std::vector<double> hourly;
  /// Mean of `hourly`.
  double aggregate = 0.0;
};

/// Hourly energy error. The series must cover whole hours.
NeeResult nee_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated,
                      int interval_minutes);

/// Energy error over the whole series: |sum(pred) - sum(actual)| / (N * p_rated), percent.
double nee_whole_period_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated);

/// nMAE of each calendar day (a trailing partial day is scored on its own points).
std::vector<double> daily_nmae_percent(std::span<const double> predicted, std::span<const double> actual,
                                       double p_rated, int interval_minutes);

enum class NeeMode { hourly, whole_period };
std::string_view to_string(NeeMode m);
NeeMode parse_nee_mode(std::string_view s);

struct Summary {
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
};

Summary summarize(std::span<const double> values);

}  // namespace s2p::eval
