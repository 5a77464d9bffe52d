#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "s2p/error.hpp"
#include "s2p/synth/site.hpp"

namespace s2p::synth {
namespace {

data::Profile constant_outdoor(double c, int minutes) {
  return {std::vector<double>(static_cast<std::size_t>(minutes), c), 1, data::Unit::celsius};
}

TEST(Temperature, ConstantWithoutVariation) {
  SiteParams p;
  p.temp_amplitude_c = 0.0;
  p.temp_day_sd_c = 0.0;
  p.temp_noise_sd_c = 0.0;
  p.heatwave_prob = 0.0;
  const data::Profile t = gen_temperature(p, 3, 15, 1);
  ASSERT_EQ(t.size(), 3u * 96);
  for (double v : t.values) EXPECT_NEAR(v, p.temp_mean_c, 1e-12);
}

TEST(Temperature, SeededAndSized) {
  const SiteParams p;
  EXPECT_EQ(gen_temperature(p, 90, 15, 4).size(), 8640u);
  EXPECT_EQ(gen_temperature(p, 5, 15, 4), gen_temperature(p, 5, 15, 4));
  EXPECT_NE(gen_temperature(p, 5, 15, 4), gen_temperature(p, 5, 15, 5));
}

TEST(Temperature, PeaksInTheAfternoon) {
  SiteParams p;
  p.temp_noise_sd_c = 0.0;
  p.temp_day_sd_c = 0.0;
  p.heatwave_prob = 0.0;
  const data::Profile t = gen_temperature(p, 1, 60, 1);
  const auto hottest = std::max_element(t.values.begin(), t.values.end()) - t.values.begin();
  EXPECT_GE(hottest, 13);
  EXPECT_LE(hottest, 16);
}

TEST(Thermal, NoCoolingCallWhenOutdoorIsCold) {
  const UnitParams unit;
  const data::Profile hvac = gen_hvac(constant_outdoor(12.0, 2 * 1440), unit, 3);
  for (double v : hvac.values) EXPECT_EQ(v, 0.0);
}

TEST(Thermal, SaturatesWhenOutdoorIsVeryHot) {
  UnitParams unit;
  unit.rated_kw = 3.0;
  const data::Profile hvac = gen_hvac(constant_outdoor(60.0, 1440), unit, 3);
  double sum = 0.0;
  for (double v : hvac.values) {
    EXPECT_TRUE(v == 0.0 || v == unit.rated_kw);
    sum += v;
  }
  EXPECT_GT(sum / static_cast<double>(hvac.size()), 0.99 * unit.rated_kw);
}

TEST(Thermal, CyclingMatchesFirstOrderSolution) {
  UnitParams unit;
  unit.capacitance_kwh_per_c = 4.0;  // slow envelope: per-minute overshoot small against the deadband
  const double outdoor = 30.0;
  const int minutes = 20 * 1440;
  const ThermalRun run = simulate_thermal(constant_outdoor(outdoor, minutes), unit, 9);

  // Closed-form charge/discharge times between the two thresholds.
  const double tau = unit.time_constant_minutes();
  const double upper = unit.setpoint_c + unit.deadband_c / 2.0;
  const double lower = unit.setpoint_c - unit.deadband_c / 2.0;
  const double eq_off = outdoor + unit.resistance_c_per_kw * unit.internal_gain_kw;
  const double eq_on = eq_off - unit.resistance_c_per_kw * unit.cop * unit.rated_kw;
  const double t_on = tau * std::log((upper - eq_on) / (lower - eq_on));
  const double t_off = tau * std::log((eq_off - lower) / (eq_off - upper));

  // Measure after one day of settling.
  std::size_t starts = 0, on_minutes = 0;
  for (std::size_t m = 1440; m < run.power.size(); ++m) {
    on_minutes += run.power[m] > 0.0 ? 1 : 0;
    if (run.power[m] > 0.0 && run.power[m - 1] == 0.0) ++starts;
  }
  const double span = static_cast<double>(run.power.size() - 1440);
  ASSERT_GT(starts, 10u);
  const double period = span / static_cast<double>(starts);
  const double duty = static_cast<double>(on_minutes) / span;
  EXPECT_NEAR(period / (t_on + t_off), 1.0, 0.10);
  EXPECT_NEAR(duty / (t_on / (t_on + t_off)), 1.0, 0.10);
}

TEST(Thermal, RequiresMinuteResolution) {
  const data::Profile coarse{std::vector<double>(96, 30.0), 15, data::Unit::celsius};
  EXPECT_THROW(gen_hvac(coarse, UnitParams{}, 1), ConfigError);
}

TEST(BaseLoad, SmoothShapeWithoutNoiseOrPulses) {
  SiteParams p;
  p.spikiness = 0.0;
  p.base_noise_kw = 0.0;
  EXPECT_EQ(gen_base(7, 15, p, 3), smooth_base(7, 15, p.base_level_kw));
  EXPECT_NE(gen_base(7, 15, SiteParams{}, 3), gen_base(7, 15, SiteParams{}, 4));
}

TEST(BaseLoad, LongRunMeanMatchesLevel) {
  SiteParams p;
  p.base_level_kw = 0.5;
  const data::Profile b = gen_base(90, 15, p, 11);
  double sum = 0.0;
  for (double v : b.values) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum / static_cast<double>(b.size()), 0.5, 0.05);
}

TEST(Site, HouseholdsSatisfyInvariants) {
  const auto users = gen_site(20, 5, SiteParams::preset("hot"), 15);
  ASSERT_EQ(users.size(), 20u);
  std::set<std::string> ids;
  for (const auto& h : users) {
    EXPECT_NO_THROW(data::validate(h));
    EXPECT_TRUE(h.labeled());
    EXPECT_EQ(h.size(), 5u * 96);
    EXPECT_EQ(h.start_time, kSyntheticStart);
    EXPECT_GT(h.p_rated_hvac, 0.0);
    for (std::size_t t = 0; t < h.size(); ++t) {
      EXPECT_EQ(h.total[t], data::quantize_power(h.total[t]));
      EXPECT_EQ(h.total[t] - (*h.hvac)[t], data::quantize_power(h.total[t] - (*h.hvac)[t]));
    }
    ids.insert(h.user_id);
  }
  EXPECT_EQ(ids.size(), 20u);
  EXPECT_EQ(users[3].user_id, "hot-003");
}

TEST(Site, SameSeedSameData) {
  const auto a = gen_site(3, 4, SiteParams::preset("mild"), 30);
  const auto b = gen_site(3, 4, SiteParams::preset("mild"), 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].total, b[i].total);
    EXPECT_EQ(*a[i].hvac, *b[i].hvac);
  }
}

TEST(Site, HvacRatioOrdering) {
  const double hot = hvac_energy_ratio(gen_site(10, 30, SiteParams::preset("hot")));
  const double mild = hvac_energy_ratio(gen_site(10, 30, SiteParams::preset("mild")));
  const double cool = hvac_energy_ratio(gen_site(10, 30, SiteParams::preset("cool")));
  EXPECT_GT(hot, mild);
  EXPECT_GT(mild, cool);
  EXPECT_GT(cool, 0.0);
}

TEST(Params, PresetsAndKeyValues) {
  EXPECT_EQ(SiteParams::preset_names(), (std::vector<std::string>{"hot", "mild", "cool"}));
  EXPECT_THROW(SiteParams::preset("arctic"), ConfigError);

  const SiteParams cool = SiteParams::preset("cool");
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : cool.to_key_values()) kv[k] = v;
  const SiteParams back = SiteParams::from_key_values(kv);
  EXPECT_EQ(back.to_key_values(), cool.to_key_values());

  const SiteParams tweaked = SiteParams::from_key_values({{"temp_mean_c", "33.5"}}, cool);
  EXPECT_EQ(tweaked.temp_mean_c, 33.5);
  EXPECT_EQ(tweaked.name, "cool");
  EXPECT_THROW(SiteParams::from_key_values({{"no_such_key", "1"}}), ConfigError);
  EXPECT_THROW(SiteParams::from_key_values({{"temp_mean_c", "warm"}}), ConfigError);

  SiteParams bad;
  bad.hvac_rated_kw = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace s2p::synth
