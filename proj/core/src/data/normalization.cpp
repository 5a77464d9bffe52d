#include "s2p/data/normalization.hpp"

#include <algorithm>
#include <limits>

#include "s2p/error.hpp"

namespace s2p::data {

void to_json(nlohmann::json& j, const NormalizationSpec& s) {
  j = {{"p_base_kw", s.p_base}, {"temp_min_c", s.temp_min}, {"temp_max_c", s.temp_max}};
}

void from_json(const nlohmann::json& j, NormalizationSpec& s) {
  s.p_base = j.at("p_base_kw").get<double>();
  s.temp_min = j.at("temp_min_c").get<double>();
  s.temp_max = j.at("temp_max_c").get<double>();
}

NormalizationSpec fit_normalization(std::span<const Household> households) {
  if (households.empty()) throw DataError("fit_normalization: empty household set");
  NormalizationSpec spec{0.0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Household& h : households) {
    if (h.total.unit != Unit::kilowatt || h.temperature.unit != Unit::celsius) {
      throw DataError("fit_normalization: household '" + h.user_id + "' is not in kW/degC");
    }
    for (double v : h.total.values) spec.p_base = std::max(spec.p_base, v);
    for (double t : h.temperature.values) {
      spec.temp_min = std::min(spec.temp_min, t);
      spec.temp_max = std::max(spec.temp_max, t);
    }
  }
  if (!(spec.p_base > 0.0)) throw DataError("fit_normalization: every total-load value is zero");
  if (!(spec.temp_max > spec.temp_min)) throw DataError("fit_normalization: temperature is constant across the set");
  return spec;
}

namespace {

double clip01(double v, std::size_t& clipped) {
  if (v < 0.0) {
    ++clipped;
    return 0.0;
  }
  if (v > 1.0) {
    ++clipped;
    return 1.0;
  }
  return v;
}

}  // namespace

NormalizedHousehold apply_normalization(const Household& h, const NormalizationSpec& spec) {
  if (!(spec.p_base > 0.0) || !(spec.temp_max > spec.temp_min)) throw ConfigError("apply_normalization: invalid spec");
  if (h.total.unit != Unit::kilowatt || h.temperature.unit != Unit::celsius ||
      (h.hvac && h.hvac->unit != Unit::kilowatt)) {
    throw DataError("apply_normalization: household '" + h.user_id + "' must be in kW/degC, got " +
                    std::string(to_string(h.total.unit)) + "/" + std::string(to_string(h.temperature.unit)));
  }
  NormalizedHousehold out{h, 0};
  Household& n = out.household;
  auto scale_power = [&](Profile& p) {
    for (double& v : p.values) v = clip01(v / spec.p_base, out.clipped);
    p.unit = Unit::per_unit;
  };
  scale_power(n.total);
  if (n.hvac) scale_power(*n.hvac);
  const double span = spec.temp_max - spec.temp_min;
  for (double& t : n.temperature.values) t = clip01((t - spec.temp_min) / span, out.clipped);
  n.temperature.unit = Unit::normalized;
  n.p_rated_hvac = h.p_rated_hvac / spec.p_base;
  return out;
}

Profile denormalize_power(const Profile& p, const NormalizationSpec& spec) {
  if (p.unit != Unit::per_unit) throw DataError("denormalize_power: profile is not per-unit");
  Profile out = p;
  for (double& v : out.values) v *= spec.p_base;
  out.unit = Unit::kilowatt;
  return out;
}

}  // namespace s2p::data
