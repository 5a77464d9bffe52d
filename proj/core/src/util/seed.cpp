#include "s2p/util/seed.hpp"

#include <array>
#include <random>
#include <vector>

namespace s2p {

namespace {

std::uint64_t generate(const std::vector<std::uint32_t>& words) {
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  return generate(words);
}

std::uint64_t mix_seed(std::uint64_t base, std::string_view key) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32)};
  for (unsigned char c : key) words.push_back(c);
  return generate(words);
}

}  // namespace s2p
