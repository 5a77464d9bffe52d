#include <algorithm>

#include "s2p/data/transform.hpp"
#include "s2p/error.hpp"

namespace s2p::data {

Profile downsample(const Profile& p, int target_interval_minutes) {
  if (p.interval_minutes <= 0 || target_interval_minutes <= 0 || target_interval_minutes % p.interval_minutes != 0) {
    throw ConfigError("downsample: target interval " + std::to_string(target_interval_minutes) +
                      " min is not a positive multiple of " + std::to_string(p.interval_minutes) + " min");
  }
  const auto factor = static_cast<std::size_t>(target_interval_minutes / p.interval_minutes);
  Profile out{{}, target_interval_minutes, p.unit};
  if (factor == 1) {
    out.values = p.values;
    return out;
  }
  const std::size_t blocks = p.size() / factor;
  out.values.resize(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < factor; ++k) s += p.values[b * factor + k];
    out.values[b] = s / static_cast<double>(factor);
  }
  return out;
}

Household downsample(const Household& h, int target_interval_minutes) {
  Household out = h;
  if (target_interval_minutes == h.interval_minutes()) return out;
  out.total = downsample(h.total, target_interval_minutes);
  out.temperature = downsample(h.temperature, target_interval_minutes);
  if (h.total.unit == Unit::kilowatt) quantize_power(out.total);
  if (h.hvac) {
    out.hvac = downsample(*h.hvac, target_interval_minutes);
    if (h.hvac->unit == Unit::kilowatt) quantize_power(*out.hvac);
  }
  return out;
}

Household slice_days(const Household& h, int first_day, int days) {
  const int per_day = 1440 / h.interval_minutes();
  if (first_day < 0 || 1440 % h.interval_minutes() != 0) throw ConfigError("slice_days: invalid day slice");
  const std::size_t begin = std::min(h.size(), static_cast<std::size_t>(first_day) * per_day);
  const std::size_t end = days < 0 ? h.size() : std::min(h.size(), begin + static_cast<std::size_t>(days) * per_day);
  auto cut = [&](const Profile& p) {
    Profile q{{p.values.begin() + static_cast<std::ptrdiff_t>(begin), p.values.begin() + static_cast<std::ptrdiff_t>(end)},
              p.interval_minutes, p.unit};
    return q;
  };
  Household out = h;
  out.total = cut(h.total);
  out.temperature = cut(h.temperature);
  if (h.hvac) out.hvac = cut(*h.hvac);
  out.start_time = h.start_time + static_cast<std::int64_t>(begin) * h.interval_minutes() * 60;
  return out;
}

}  // namespace s2p::data
