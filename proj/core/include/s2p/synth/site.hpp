#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "s2p/data/profile.hpp"

namespace s2p::synth {

/// Climate, HVAC fleet and base-load character of one synthetic site.
/// Defaults are the "hot" preset.
struct SiteParams {
  std::string name = "hot";
  std::uint64_t seed = 2015;

  // Outdoor temperature.
  double temp_mean_c = 30.0;
  double temp_amplitude_c = 6.0;   ///< half peak-to-trough of the diurnal cycle
  double temp_day_sd_c = 1.5;      ///< day-to-day drift of the daily mean
  double temp_noise_sd_c = 0.3;    ///< fast autocorrelated noise
  double heatwave_prob = 0.05;     ///< chance a heat wave starts on a given day
  double heatwave_boost_c = 3.0;
  int heatwave_days = 3;
  double user_temp_offset_sd_c = 0.5;

  // HVAC fleet (sampled per user around these values).
  double hvac_rated_kw = 3.8;
  double hvac_rated_spread = 0.3;  ///< +- fraction around the mean rating
  double hvac_cop = 2.8;           ///< thermal kW removed per electrical kW
  double setpoint_c = 24.0;
  double setpoint_sd_c = 1.0;
  double deadband_c = 1.0;
  double resistance_c_per_kw = 3.0;
  double capacitance_kwh_per_c = 1.2;
  double internal_gain_kw = 0.8;

  // Base load.
  double base_level_kw = 0.9;      ///< long-run mean including pulses
  double base_noise_kw = 0.08;
  double spikiness = 0.4;          ///< appliance pulses per hour
  double pulse_kw = 1.5;
  double pulse_minutes = 20.0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// Ordered "key = value" pairs, one per field.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  /// Starts from `base` and applies every pair; unknown keys throw.
  static SiteParams from_key_values(const std::map<std::string, std::string>& values, SiteParams base);
  static SiteParams from_key_values(const std::map<std::string, std::string>& values);

  /// "hot", "mild" or "cool"; throws ConfigError otherwise.
  static SiteParams preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// One household's cooling unit and first-order (1R1C) building envelope.
struct UnitParams {
  double rated_kw = 3.5;
  double cop = 2.8;
  double setpoint_c = 24.0;
  double deadband_c = 1.0;
  double resistance_c_per_kw = 3.0;
  double capacitance_kwh_per_c = 1.2;
  double internal_gain_kw = 0.8;

  void validate() const;
  /// R*C in minutes.
  double time_constant_minutes() const { return resistance_c_per_kw * capacitance_kwh_per_c * 60.0; }
};

/// Diurnal sinusoid peaking mid-afternoon, plus day-to-day drift,
/// autocorrelated noise and occasional multi-day heat waves. Generated at
/// 1-minute resolution and block-averaged to `interval_minutes`.
data::Profile gen_temperature(const SiteParams& site, int days, int interval_minutes, std::uint64_t seed);

struct ThermalRun {
  data::Profile power;           ///< kW, each minute either 0 or rated
  std::vector<double> indoor_c;  ///< indoor temperature at the start of each minute
};

/// Hysteresis thermostat on a 1R1C envelope: the compressor starts when
/// indoor > setpoint + deadband/2 and stops when indoor < setpoint -
/// deadband/2. Requires a 1-minute outdoor profile.
ThermalRun simulate_thermal(const data::Profile& outdoor_1min, const UnitParams& unit, std::uint64_t seed);

/// Power profile of simulate_thermal.
data::Profile gen_hvac(const data::Profile& outdoor_1min, const UnitParams& unit, std::uint64_t seed);

/// Non-negative base load: smooth daily shape (morning/evening peaks,
/// weekday/weekend factor) + autocorrelated noise + random appliance
/// pulses. Long-run mean is site.base_level_kw.
data::Profile gen_base(int days, int interval_minutes, const SiteParams& site, std::uint64_t seed);

/// The deterministic part of gen_base: daily shape x weekday factor at
/// `level_kw` mean, no noise and no pulses.
data::Profile smooth_base(int days, int interval_minutes, double level_kw);

/// Unit drawn around the site's fleet parameters.
UnitParams sample_unit(const SiteParams& site, std::uint64_t seed);

/// Labeled households at `interval_minutes`. Each user shares the site
/// temperature (plus a personal offset) and draws its own unit and base
/// load from a stream seeded by (site.seed, user index).
std::vector<data::Household> gen_site(int n_users, int days, const SiteParams& site, int interval_minutes = 15);

/// sum(hvac) / sum(total) over a set of labeled households.
double hvac_energy_ratio(std::span<const data::Household> households);

/// 2015-06-01T00:00:00Z, the first sample of every synthetic site.
inline constexpr std::int64_t kSyntheticStart = 1433116800;

}  // namespace s2p::synth
