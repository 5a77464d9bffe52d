#include <cmath>
#include <random>

#include "s2p/error.hpp"
#include "s2p/synth/site.hpp"

namespace s2p::synth {

void UnitParams::validate() const {
  if (!(rated_kw > 0.0)) throw ConfigError("unit: rated_kw must be positive");
  if (!(cop > 0.0)) throw ConfigError("unit: cop must be positive");
  if (!(deadband_c > 0.0)) throw ConfigError("unit: deadband must be positive");
  if (!(resistance_c_per_kw > 0.0) || !(capacitance_kwh_per_c > 0.0)) {
    throw ConfigError("unit: thermal resistance and capacitance must be positive");
  }
  if (!(internal_gain_kw >= 0.0)) throw ConfigError("unit: internal gain must be non-negative");
}

ThermalRun simulate_thermal(const data::Profile& outdoor, const UnitParams& unit, std::uint64_t seed) {
  unit.validate();
  if (outdoor.interval_minutes != 1) {
    throw ConfigError("simulate_thermal: outdoor temperature must be at 1-minute resolution, got " +
                      std::to_string(outdoor.interval_minutes));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(-0.5, 0.5);

  const double upper = unit.setpoint_c + unit.deadband_c / 2.0;
  const double lower = unit.setpoint_c - unit.deadband_c / 2.0;
  const double cooling_kw = unit.cop * unit.rated_kw;
  // Exact decay of the first-order model over one minute with constant inputs.
  const double decay = std::exp(-1.0 / unit.time_constant_minutes());

  ThermalRun run;
  run.power = data::Profile{std::vector<double>(outdoor.size(), 0.0), 1, data::Unit::kilowatt};
  run.indoor_c.resize(outdoor.size());

  double indoor = unit.setpoint_c + start(rng) * unit.deadband_c;
  bool on = false;
  for (std::size_t t = 0; t < outdoor.size(); ++t) {
    if (on && indoor < lower) on = false;
    if (!on && indoor > upper) on = true;
    run.indoor_c[t] = indoor;
    run.power.values[t] = on ? unit.rated_kw : 0.0;
    const double equilibrium =
        outdoor[t] + unit.resistance_c_per_kw * (unit.internal_gain_kw - (on ? cooling_kw : 0.0));
    indoor = equilibrium + (indoor - equilibrium) * decay;
  }
  return run;
}

data::Profile gen_hvac(const data::Profile& outdoor_1min, const UnitParams& unit, std::uint64_t seed) {
  return simulate_thermal(outdoor_1min, unit, seed).power;
}

}  // namespace s2p::synth
