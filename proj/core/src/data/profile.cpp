#include "s2p/data/profile.hpp"

#include <algorithm>
#include <cmath>

#include "s2p/error.hpp"

namespace s2p::data {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::kilowatt: return "kW";
    case Unit::per_unit: return "per-unit";
    case Unit::celsius: return "degC";
    case Unit::normalized: return "normalized";
  }
  return "unknown";
}

double quantize_power(double kw) { return std::nearbyint(kw / kPowerQuantum) * kPowerQuantum; }

void quantize_power(Profile& p) {
  for (double& v : p.values) v = quantize_power(v);
}

namespace {

bool is_power(Unit u) { return u == Unit::kilowatt || u == Unit::per_unit; }

void check_profile(const Household& h, const Profile& p, std::string_view what) {
  const std::string where = "household '" + h.user_id + "' " + std::string(what);
  if (p.empty()) throw DataError(where + " profile is empty");
  if (p.interval_minutes <= 0) throw DataError(where + " has non-positive interval");
  if (p.size() != h.total.size() || p.interval_minutes != h.total.interval_minutes) {
    throw DataError(where + " length/interval (" + std::to_string(p.size()) + " @ " +
                    std::to_string(p.interval_minutes) + " min) differs from total (" +
                    std::to_string(h.total.size()) + " @ " + std::to_string(h.total.interval_minutes) + " min)");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw DataError(where + " has a non-finite value at index " + std::to_string(i));
    if (is_power(p.unit) && p[i] < 0.0) {
      throw DataError(where + " has negative power at index " + std::to_string(i));
    }
  }
}

}  // namespace

void validate(const Household& h) {
  check_profile(h, h.total, "total");
  check_profile(h, h.temperature, "temperature");
  if (!is_power(h.total.unit)) throw DataError("household '" + h.user_id + "' total is not a power profile");
  if (h.hvac) {
    check_profile(h, *h.hvac, "hvac");
    if (h.hvac->unit != h.total.unit) throw DataError("household '" + h.user_id + "' hvac/total unit mismatch");
    for (std::size_t i = 0; i < h.size(); ++i) {
      if ((*h.hvac)[i] > h.total[i] + 1e-9) {
        throw DataError("household '" + h.user_id + "' hvac exceeds total at index " + std::to_string(i));
      }
    }
  }
  if (h.hvac && !(h.p_rated_hvac > 0.0)) throw DataError("household '" + h.user_id + "' rated HVAC power must be positive");
}

double max_observed(const Profile& p) {
  return p.empty() ? 0.0 : *std::max_element(p.values.begin(), p.values.end());
}

}  // namespace s2p::data
