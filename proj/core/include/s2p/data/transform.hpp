#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2p/data/profile.hpp"

namespace s2p::data {

/// Block means over `target_interval_minutes / p.interval_minutes` source
/// samples; a trailing partial block is dropped. Throws ConfigError when
/// the target is not a positive multiple of the source interval.
Profile downsample(const Profile& p, int target_interval_minutes);

/// Every profile of a household resampled together; power is re-snapped
/// to the quantum grid.
Household downsample(const Household& h, int target_interval_minutes);

struct ClampedDifference {
  Profile result;
  /// Samples where the subtrahend exceeded the minuend.
  std::size_t clamped = 0;
};

/// max(total - hvac, 0) element-wise: the base-load profile.
ClampedDifference subtract_hvac(const Profile& total, const Profile& hvac);

/// Hook for removing a separately identified residual load (e.g. water
/// heater or dryer) from a household's total before augmentation.
ClampedDifference remove_residual_load(const Profile& total, const Profile& residual);

/// N base profiles x N HVAC profiles -> N^2 households. Cell (i, j) sits at
/// index i*N + j: total = base_i + hvac_j, label hvac_j, temperature temp_j.
/// HVAC j stays paired with temperature j. `rated` gives the rated power of
/// HVAC unit j.
std::vector<Household> augment(std::span<const Profile> bases, std::span<const Profile> hvacs,
                               std::span<const Profile> temps, std::span<const double> rated);

/// Convenience over labeled households: bases come from subtract_hvac.
std::vector<Household> augment(std::span<const Household> households);

/// Deterministic user-disjoint partition of `n` indices. Group sizes follow
/// `fractions` (largest-remainder rounding). Throws ConfigError if the
/// fractions do not sum to 1 or there are fewer users than groups.
std::vector<std::vector<std::size_t>> split_users(std::size_t n, std::span<const double> fractions, std::uint64_t seed);

/// Same partition applied to a household list.
std::vector<std::vector<Household>> split_households(std::span<const Household> households,
                                                     std::span<const double> fractions, std::uint64_t seed);

/// Samples [first_day, first_day + days) of every profile; days < 0 means
/// "to the end".
Household slice_days(const Household& h, int first_day, int days = -1);

}  // namespace s2p::data
