#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "s2p/data/transform.hpp"
#include "s2p/error.hpp"
#include "s2p/synth/site.hpp"
#include "s2p/util/seed.hpp"

namespace s2p::synth {

namespace {

constexpr int kMinutesPerDay = 1440;

struct Field {
  const char* key;
  std::function<std::string(const SiteParams&)> get;
  std::function<void(SiteParams&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw ConfigError("site parameter '" + key + "': not a number: '" + v + "'");
  return out;
}

template <typename T>
T to_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw ConfigError("site parameter '" + key + "': not an integer: '" + v + "'");
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

#define S2P_DOUBLE_FIELD(member)                                                        \
  Field {                                                                               \
    #member, [](const SiteParams& p) { return shortest(p.member); },                    \
        [](SiteParams& p, const std::string& v) { p.member = to_double(#member, v); }   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"name", [](const SiteParams& p) { return p.name; }, [](SiteParams& p, const std::string& v) { p.name = v; }},
      Field{"seed", [](const SiteParams& p) { return std::to_string(p.seed); },
            [](SiteParams& p, const std::string& v) { p.seed = to_integer<std::uint64_t>("seed", v); }},
      S2P_DOUBLE_FIELD(temp_mean_c),
      S2P_DOUBLE_FIELD(temp_amplitude_c),
      S2P_DOUBLE_FIELD(temp_day_sd_c),
      S2P_DOUBLE_FIELD(temp_noise_sd_c),
      S2P_DOUBLE_FIELD(heatwave_prob),
      S2P_DOUBLE_FIELD(heatwave_boost_c),
      Field{"heatwave_days", [](const SiteParams& p) { return std::to_string(p.heatwave_days); },
            [](SiteParams& p, const std::string& v) { p.heatwave_days = to_integer<int>("heatwave_days", v); }},
      S2P_DOUBLE_FIELD(user_temp_offset_sd_c),
      S2P_DOUBLE_FIELD(hvac_rated_kw),
      S2P_DOUBLE_FIELD(hvac_rated_spread),
      S2P_DOUBLE_FIELD(hvac_cop),
      S2P_DOUBLE_FIELD(setpoint_c),
      S2P_DOUBLE_FIELD(setpoint_sd_c),
      S2P_DOUBLE_FIELD(deadband_c),
      S2P_DOUBLE_FIELD(resistance_c_per_kw),
      S2P_DOUBLE_FIELD(capacitance_kwh_per_c),
      S2P_DOUBLE_FIELD(internal_gain_kw),
      S2P_DOUBLE_FIELD(base_level_kw),
      S2P_DOUBLE_FIELD(base_noise_kw),
      S2P_DOUBLE_FIELD(spikiness),
      S2P_DOUBLE_FIELD(pulse_kw),
      S2P_DOUBLE_FIELD(pulse_minutes),
  };
  return table;
}

#undef S2P_DOUBLE_FIELD

double bump(double hour, double centre, double width) {
  double d = std::abs(hour - centre);
  d = std::min(d, 24.0 - d);
  return std::exp(-d * d / (2.0 * width * width));
}

/// Daily base-load shape per minute, mean 1.
const std::vector<double>& daily_shape() {
  static const std::vector<double> shape = [] {
    std::vector<double> s(kMinutesPerDay);
    double sum = 0.0;
    for (int m = 0; m < kMinutesPerDay; ++m) {
      const double h = m / 60.0;
      s[m] = 0.55 + 0.35 * bump(h, 7.5, 1.2) + 0.75 * bump(h, 19.5, 2.0) + 0.1 * bump(h, 13.0, 3.0);
      sum += s[m];
    }
    for (double& v : s) v *= kMinutesPerDay / sum;
    return s;
  }();
  return shape;
}

/// Weekday/weekend multiplier with weekly mean exactly 1 (day 0 is a Monday).
double day_factor(int day) { return (day % 7) >= 5 ? 1.075 : 0.97; }

data::Profile smooth_base_1min(int days, double level_kw) {
  const auto& shape = daily_shape();
  data::Profile p{std::vector<double>(static_cast<std::size_t>(days) * kMinutesPerDay), 1, data::Unit::kilowatt};
  for (int d = 0; d < days; ++d)
    for (int m = 0; m < kMinutesPerDay; ++m)
      p.values[static_cast<std::size_t>(d) * kMinutesPerDay + m] = level_kw * shape[m] * day_factor(d);
  return p;
}

double expected_pulse_kw(const SiteParams& site) { return site.spikiness / 60.0 * site.pulse_minutes * site.pulse_kw; }

}  // namespace

void SiteParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("site parameters: ") + what);
  };
  require(!name.empty(), "name must be non-empty");
  require(temp_amplitude_c >= 0.0 && temp_day_sd_c >= 0.0 && temp_noise_sd_c >= 0.0 && user_temp_offset_sd_c >= 0.0,
          "temperature amplitudes and deviations must be >= 0");
  require(heatwave_prob >= 0.0 && heatwave_prob <= 1.0, "heatwave_prob must lie in [0,1]");
  require(heatwave_days >= 0, "heatwave_days must be >= 0");
  require(hvac_rated_kw > 0.0, "hvac_rated_kw must be positive");
  require(hvac_rated_spread >= 0.0 && hvac_rated_spread < 1.0, "hvac_rated_spread must lie in [0,1)");
  require(hvac_cop > 0.0, "hvac_cop must be positive");
  require(setpoint_sd_c >= 0.0, "setpoint_sd_c must be >= 0");
  require(deadband_c > 0.0, "deadband_c must be positive");
  require(resistance_c_per_kw > 0.0 && capacitance_kwh_per_c > 0.0, "R and C must be positive");
  require(internal_gain_kw >= 0.0, "internal_gain_kw must be >= 0");
  require(base_level_kw >= 0.0 && base_noise_kw >= 0.0, "base load level and noise must be >= 0");
  require(spikiness >= 0.0 && spikiness <= 60.0, "spikiness must lie in [0, 60] pulses per hour");
  require(pulse_kw >= 0.0 && pulse_minutes >= 1.0, "pulse_kw must be >= 0 and pulse_minutes >= 1");
}

std::vector<std::pair<std::string, std::string>> SiteParams::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

SiteParams SiteParams::from_key_values(const std::map<std::string, std::string>& values, SiteParams base) {
  for (const auto& [key, value] : values) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
    if (it == fields().end()) throw ConfigError("unknown site parameter '" + key + "'");
    it->set(base, value);
  }
  base.validate();
  return base;
}

SiteParams SiteParams::from_key_values(const std::map<std::string, std::string>& values) {
  return from_key_values(values, SiteParams{});
}

SiteParams SiteParams::preset(std::string_view name) {
  SiteParams p;
  if (name == "hot") return p;
  if (name == "mild") {
    p.name = "mild";
    p.seed = 2016;
    p.temp_mean_c = 23.5;
    p.temp_amplitude_c = 4.5;
    p.temp_day_sd_c = 1.0;
    p.temp_noise_sd_c = 0.25;
    p.heatwave_prob = 0.03;
    p.hvac_rated_kw = 3.0;
    p.base_level_kw = 0.7;
    p.spikiness = 0.3;
    p.pulse_kw = 1.2;
    return p;
  }
  if (name == "cool") {
    p.name = "cool";
    p.seed = 2017;
    p.temp_mean_c = 19.5;
    p.temp_amplitude_c = 8.0;
    p.temp_day_sd_c = 2.5;
    p.temp_noise_sd_c = 0.4;
    p.heatwave_prob = 0.06;
    p.heatwave_boost_c = 4.0;
    p.hvac_rated_kw = 3.4;
    p.setpoint_c = 24.5;
    p.base_level_kw = 1.1;
    p.spikiness = 0.6;
    p.pulse_kw = 2.0;
    return p;
  }
  throw ConfigError("unknown site preset '" + std::string(name) + "' (expected hot, mild or cool)");
}

std::vector<std::string> SiteParams::preset_names() { return {"hot", "mild", "cool"}; }

data::Profile gen_temperature(const SiteParams& site, int days, int interval_minutes, std::uint64_t seed) {
  site.validate();
  if (days < 1) throw ConfigError("gen_temperature: days must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);

  // Daily component: AR(1) drift plus heat-wave boosts, anchored at noon.
  std::vector<double> daily(static_cast<std::size_t>(days));
  double drift = site.temp_day_sd_c * normal(rng);
  int wave_left = 0;
  for (int d = 0; d < days; ++d) {
    if (d > 0) drift = 0.6 * drift + std::sqrt(1.0 - 0.36) * site.temp_day_sd_c * normal(rng);
    if (wave_left == 0 && unit01(rng) < site.heatwave_prob) wave_left = site.heatwave_days;
    double boost = 0.0;
    if (wave_left > 0) {
      boost = site.heatwave_boost_c;
      --wave_left;
    }
    daily[d] = drift + boost;
  }

  const double phi = 0.99;
  const double innovation = site.temp_noise_sd_c * std::sqrt(1.0 - phi * phi);
  double noise = site.temp_noise_sd_c * normal(rng);

  const std::size_t n = static_cast<std::size_t>(days) * kMinutesPerDay;
  data::Profile p{std::vector<double>(n), 1, data::Unit::celsius};
  for (std::size_t t = 0; t < n; ++t) {
    const double day_pos = static_cast<double>(t) / kMinutesPerDay - 0.5;
    const int d0 = static_cast<int>(std::floor(day_pos));
    const double frac = day_pos - d0;
    const double a = daily[std::clamp(d0, 0, days - 1)];
    const double b = daily[std::clamp(d0 + 1, 0, days - 1)];
    const double hour = static_cast<double>(t % kMinutesPerDay) / 60.0;
    const double diurnal = site.temp_amplitude_c * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
    if (t > 0) noise = phi * noise + innovation * normal(rng);
    p.values[t] = site.temp_mean_c + diurnal + a + (b - a) * frac + noise;
  }
  return data::downsample(p, interval_minutes);
}

data::Profile gen_base(int days, int interval_minutes, const SiteParams& site, std::uint64_t seed) {
  site.validate();
  if (days < 1) throw ConfigError("gen_base: days must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  std::exponential_distribution<double> duration(1.0 / site.pulse_minutes);

  const double smooth_level = std::max(site.base_level_kw - expected_pulse_kw(site), 0.25 * site.base_level_kw);
  data::Profile p = smooth_base_1min(days, smooth_level);

  const double phi = 0.95;
  const double innovation = site.base_noise_kw * std::sqrt(1.0 - phi * phi);
  double noise = site.base_noise_kw * normal(rng);
  const double arrival = site.spikiness / 60.0;
  std::vector<double> pulses(p.size(), 0.0);
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (site.base_noise_kw > 0.0) {
      if (t > 0) noise = phi * noise + innovation * normal(rng);
      p.values[t] += noise;
    }
    if (arrival > 0.0 && unit01(rng) < arrival) {
      const auto len = static_cast<std::size_t>(std::max(1.0, std::round(duration(rng))));
      const double kw = site.pulse_kw * (0.6 + 0.8 * unit01(rng));
      for (std::size_t k = t; k < std::min(p.size(), t + len); ++k) pulses[k] += kw;
    }
    p.values[t] = std::max(0.0, p.values[t] + pulses[t]);
  }
  return data::downsample(p, interval_minutes);
}

data::Profile smooth_base(int days, int interval_minutes, double level_kw) {
  return data::downsample(smooth_base_1min(days, level_kw), interval_minutes);
}

UnitParams sample_unit(const SiteParams& site, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto around = [&](double mean, double lo, double hi) { return mean * (lo + (hi - lo) * unit01(rng)); };
  UnitParams u;
  u.rated_kw = data::quantize_power(around(site.hvac_rated_kw, 1.0 - site.hvac_rated_spread, 1.0 + site.hvac_rated_spread));
  u.cop = around(site.hvac_cop, 0.9, 1.1);
  u.setpoint_c = site.setpoint_c + std::clamp(normal(rng), -2.5, 2.5) * site.setpoint_sd_c;
  u.deadband_c = around(site.deadband_c, 0.8, 1.3);
  u.resistance_c_per_kw = around(site.resistance_c_per_kw, 0.85, 1.15);
  u.capacitance_kwh_per_c = around(site.capacitance_kwh_per_c, 0.75, 1.3);
  u.internal_gain_kw = around(site.internal_gain_kw, 0.7, 1.3);
  return u;
}

std::vector<data::Household> gen_site(int n_users, int days, const SiteParams& site, int interval_minutes) {
  site.validate();
  if (n_users < 1) throw ConfigError("gen_site: n_users must be >= 1");
  if (interval_minutes < 1 || kMinutesPerDay % interval_minutes != 0) {
    throw ConfigError("gen_site: interval must divide a day into whole samples");
  }
  const data::Profile site_temp = gen_temperature(site, days, 1, site.seed);

  std::vector<data::Household> out;
  out.reserve(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    const std::uint64_t user_seed = mix_seed({site.seed, static_cast<std::uint64_t>(u)});
    std::mt19937_64 rng(user_seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    data::Profile temp = site_temp;
    const double offset = site.user_temp_offset_sd_c * normal(rng);
    for (double& v : temp.values) v += offset;

    const UnitParams unit = sample_unit(site, mix_seed({user_seed, 1}));
    data::Profile hvac = gen_hvac(temp, unit, mix_seed({user_seed, 2}));
    data::Profile base = gen_base(days, 1, site, mix_seed({user_seed, 3}));
    data::quantize_power(hvac);
    data::quantize_power(base);
    data::Profile total = base;
    for (std::size_t t = 0; t < total.size(); ++t) total.values[t] += hvac[t];

    data::Household h;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03d", site.name.c_str(), u);
    h.user_id = id;
    h.total = std::move(total);
    h.hvac = std::move(hvac);
    h.temperature = std::move(temp);
    h.p_rated_hvac = unit.rated_kw;
    h.start_time = kSyntheticStart;
    out.push_back(data::downsample(h, interval_minutes));
  }
  return out;
}

double hvac_energy_ratio(std::span<const data::Household> households) {
  double hvac = 0.0, total = 0.0;
  for (const auto& h : households) {
    if (!h.hvac) throw DataError("hvac_energy_ratio: household '" + h.user_id + "' is unlabeled");
    for (double v : h.hvac->values) hvac += v;
    for (double v : h.total.values) total += v;
  }
  return total > 0.0 ? hvac / total : 0.0;
}

}  // namespace s2p::synth
