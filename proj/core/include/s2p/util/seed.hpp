#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace s2p {

/// Stable 64-bit seed from a list of integers (std::seed_seq mixing), so
/// streams depend on what they are for rather than on scheduling order.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

/// Stable 64-bit seed from a base seed and a text key.
std::uint64_t mix_seed(std::uint64_t base, std::string_view key);

}  // namespace s2p
