#include <algorithm>

#include "s2p/data/transform.hpp"
#include "s2p/error.hpp"

namespace s2p::data {

namespace {

ClampedDifference clamped_difference(const Profile& a, const Profile& b, const char* what) {
  if (a.size() != b.size() || a.interval_minutes != b.interval_minutes) {
    throw DataError(std::string(what) + ": length/interval mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  ClampedDifference out{{std::vector<double>(a.size()), a.interval_minutes, a.unit}, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d < 0.0) {
      ++out.clamped;
      out.result.values[i] = 0.0;
    } else {
      out.result.values[i] = d;
    }
  }
  return out;
}

}  // namespace

ClampedDifference subtract_hvac(const Profile& total, const Profile& hvac) {
  return clamped_difference(total, hvac, "subtract_hvac");
}

ClampedDifference remove_residual_load(const Profile& total, const Profile& residual) {
  return clamped_difference(total, residual, "remove_residual_load");
}

std::vector<Household> augment(std::span<const Profile> bases, std::span<const Profile> hvacs,
                               std::span<const Profile> temps, std::span<const double> rated) {
  const std::size_t n = bases.size();
  if (hvacs.size() != n || temps.size() != n || rated.size() != n) {
    throw DataError("augment: need equally many bases, HVAC profiles, temperatures and ratings");
  }
  if (n == 0) return {};
  const std::size_t len = bases[0].size();
  const int interval = bases[0].interval_minutes;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Profile* p : {&bases[i], &hvacs[i], &temps[i]}) {
      if (p->size() != len || p->interval_minutes != interval) {
        throw DataError("augment: profile " + std::to_string(i) + " length/interval differs from profile 0");
      }
    }
  }

  std::vector<Profile> snapped_bases(bases.begin(), bases.end());
  std::vector<Profile> snapped_hvacs(hvacs.begin(), hvacs.end());
  for (auto& p : snapped_bases) quantize_power(p);
  for (auto& p : snapped_hvacs) quantize_power(p);

  std::vector<Household> out;
  out.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Household h;
      h.user_id = "aug-" + std::to_string(i) + "-" + std::to_string(j);
      h.total = snapped_bases[i];
      for (std::size_t t = 0; t < len; ++t) h.total.values[t] += snapped_hvacs[j][t];
      h.hvac = snapped_hvacs[j];
      h.temperature = temps[j];
      h.p_rated_hvac = rated[j];
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::vector<Household> augment(std::span<const Household> households) {
  std::vector<Profile> bases, hvacs, temps;
  std::vector<double> rated;
  for (const Household& h : households) {
    if (!h.labeled()) throw DataError("augment: household '" + h.user_id + "' has no HVAC label");
    bases.push_back(subtract_hvac(h.total, *h.hvac).result);
    hvacs.push_back(*h.hvac);
    temps.push_back(h.temperature);
    rated.push_back(h.p_rated_hvac);
  }
  std::vector<Household> out = augment(bases, hvacs, temps, rated);
  if (!households.empty()) {
    for (Household& h : out) h.start_time = households.front().start_time;
  }
  return out;
}

}  // namespace s2p::data
