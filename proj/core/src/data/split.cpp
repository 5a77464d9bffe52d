#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "s2p/data/transform.hpp"
#include "s2p/error.hpp"

namespace s2p::data {

std::vector<std::vector<std::size_t>> split_users(std::size_t n, std::span<const double> fractions,
                                                  std::uint64_t seed) {
  if (fractions.empty()) throw ConfigError("split_users: no fractions given");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("split_users: fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split_users: fractions sum to " + std::to_string(sum) + ", not 1");
  if (n < fractions.size()) {
    throw ConfigError("split_users: " + std::to_string(n) + " users cannot fill " + std::to_string(fractions.size()) +
                      " partitions");
  }

  // Largest-remainder apportionment; ties go to the earlier group.
  std::vector<std::size_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < fractions.size(); ++g) {
    const double exact = fractions[g] * static_cast<double>(n);
    counts[g] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[g];
    remainders.emplace_back(exact - static_cast<double>(counts[g]), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> groups(fractions.size());
  std::size_t pos = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + counts[g]));
    std::sort(groups[g].begin(), groups[g].end());
    pos += counts[g];
  }
  return groups;
}

std::vector<std::vector<Household>> split_households(std::span<const Household> households,
                                                     std::span<const double> fractions, std::uint64_t seed) {
  std::vector<std::vector<Household>> out;
  for (const auto& group : split_users(households.size(), fractions, seed)) {
    auto& dst = out.emplace_back();
    for (std::size_t i : group) dst.push_back(households[i]);
  }
  return out;
}

}  // namespace s2p::data
