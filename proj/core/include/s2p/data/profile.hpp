#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2p::data {

enum class Unit { kilowatt, per_unit, celsius, normalized };

std::string_view to_string(Unit unit);

/// Uniformly sampled series with its sampling interval.
struct Profile {
  std::vector<double> values;
  int interval_minutes = 1;
  Unit unit = Unit::kilowatt;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// One metered user: total load, optional HVAC sub-meter label, outdoor
/// temperature, and the HVAC rated power used to normalize metrics.
struct Household {
  std::string user_id;
  Profile total;
  std::optional<Profile> hvac;
  Profile temperature;
  /// Same unit as `total` (kW before normalization, p.u. after).
  double p_rated_hvac = 0.0;
  /// Unix seconds of the first sample.
  std::int64_t start_time = 0;

  bool labeled() const { return hvac.has_value(); }
  std::size_t size() const { return total.size(); }
  int interval_minutes() const { return total.interval_minutes; }
};

/// Power values are carried on a grid of 2^-16 kW (about 0.015 W) so that
/// sums and differences of profiles, as done by augmentation, are exact.
inline constexpr double kPowerQuantum = 0x1.0p-16;

double quantize_power(double kw);
void quantize_power(Profile& p);

/// Throws DataError describing the first violated invariant: empty or
/// mismatched profiles, negative power, hvac above total by more than
/// 1e-9, non-positive rated power on a labeled household.
void validate(const Household& h);

/// Largest observed HVAC value; the fallback rated power when no
/// nameplate value is known.
double max_observed(const Profile& p);

}  // namespace s2p::data
