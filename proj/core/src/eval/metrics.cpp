#include "s2p/eval/metrics.hpp"

#include <cmath>
#include <string>

#include "s2p/error.hpp"

namespace s2p::eval {

namespace {

void check_pair(std::span<const double> predicted, std::span<const double> actual, double p_rated, const char* what) {
  if (predicted.size() != actual.size()) {
    throw ShapeError(std::string(what) + ": predicted has " + std::to_string(predicted.size()) + " points, actual " +
                     std::to_string(actual.size()));
  }
  if (predicted.empty()) throw DataError(std::string(what) + ": empty series");
  if (!(p_rated > 0.0)) throw DataError(std::string(what) + ": rated power must be positive");
}

int points_per(int minutes, int interval_minutes, const char* what) {
  if (interval_minutes < 1 || minutes % interval_minutes != 0) {
    throw ConfigError(std::string(what) + ": interval of " + std::to_string(interval_minutes) +
                      " minutes does not divide " + std::to_string(minutes) + " minutes");
  }
  return minutes / interval_minutes;
}

}  // namespace

double nmae_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated) {
  check_pair(predicted, actual, p_rated, "nmae");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - actual[i]) / p_rated;
  return 100.0 * sum / static_cast<double>(predicted.size());
}

NeeResult nee_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated,
                      int interval_minutes) {
  check_pair(predicted, actual, p_rated, "nee");
  const std::size_t per_hour = static_cast<std::size_t>(points_per(60, interval_minutes, "nee"));
  if (predicted.size() % per_hour != 0) {
    throw DataError("nee: " + std::to_string(predicted.size()) + " points do not form whole hours of " +
                    std::to_string(per_hour));
  }
  NeeResult r;
  r.hourly.reserve(predicted.size() / per_hour);
  double total = 0.0;
  for (std::size_t start = 0; start < predicted.size(); start += per_hour) {
    double p = 0.0, a = 0.0;
    for (std::size_t i = start; i < start + per_hour; ++i) {
      p += predicted[i];
      a += actual[i];
    }
    const double v = 100.0 * std::abs(p - a) / (static_cast<double>(per_hour) * p_rated);
    r.hourly.push_back(v);
    total += v;
  }
  r.aggregate = total / static_cast<double>(r.hourly.size());
  return r;
}

double nee_whole_period_percent(std::span<const double> predicted, std::span<const double> actual, double p_rated) {
  check_pair(predicted, actual, p_rated, "nee");
  double p = 0.0, a = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    p += predicted[i];
    a += actual[i];
  }
  return 100.0 * std::abs(p - a) / (static_cast<double>(predicted.size()) * p_rated);
}

std::vector<double> daily_nmae_percent(std::span<const double> predicted, std::span<const double> actual,
                                       double p_rated, int interval_minutes) {
  check_pair(predicted, actual, p_rated, "daily nmae");
  const std::size_t per_day = static_cast<std::size_t>(points_per(1440, interval_minutes, "daily nmae"));
  std::vector<double> out;
  for (std::size_t start = 0; start < predicted.size(); start += per_day) {
    const std::size_t n = std::min(per_day, predicted.size() - start);
    out.push_back(nmae_percent(predicted.subspan(start, n), actual.subspan(start, n), p_rated));
  }
  return out;
}

std::string_view to_string(NeeMode m) { return m == NeeMode::hourly ? "hourly" : "whole_period"; }

NeeMode parse_nee_mode(std::string_view s) {
  if (s == "hourly") return NeeMode::hourly;
  if (s == "whole_period") return NeeMode::whole_period;
  throw ConfigError("unknown nEE mode '" + std::string(s) + "' (expected hourly or whole_period)");
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw DataError("summarize: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  Summary s;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

}  // namespace s2p::eval
