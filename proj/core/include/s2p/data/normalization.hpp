#pragma once

#include <span>

#include <nlohmann/json.hpp>

#include "s2p/data/profile.hpp"

namespace s2p::data {

/// Per-unit power base and temperature min-max range.
struct NormalizationSpec {
  double p_base = 1.0;
  double temp_min = 0.0;
  double temp_max = 1.0;

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

void to_json(nlohmann::json& j, const NormalizationSpec& s);
void from_json(const nlohmann::json& j, NormalizationSpec& s);

/// p_base = largest total power across the set; temperature range = global
/// extrema. Throws DataError on an empty set, a constant temperature, or an
/// all-zero load.
NormalizationSpec fit_normalization(std::span<const Household> households);

struct NormalizedHousehold {
  Household household;
  /// Values pulled back into [0, 1] (power and temperature combined).
  std::size_t clipped = 0;
};

/// kW -> p.u. by p_base, degC -> [0,1] by min-max. Out-of-range values
/// (e.g. a hotter transfer site) are clipped and counted.
NormalizedHousehold apply_normalization(const Household& h, const NormalizationSpec& spec);

/// p.u. -> kW.
Profile denormalize_power(const Profile& p, const NormalizationSpec& spec);

}  // namespace s2p::data
