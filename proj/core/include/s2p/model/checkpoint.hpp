#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "s2p/model/s2p_model.hpp"

namespace s2p::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Container layout: "S2PCKPT\0", u32 version, u64 payload length, the
/// payload, u32 CRC-32 of the payload. All integers and doubles are
/// little-endian; tensors are stored as rank, extents and raw doubles, so a
/// decode is bit-exact.
std::vector<std::uint8_t> encode_checkpoint(const S2PModel& model);
/// Throws FormatError on a bad magic string, version, length or checksum.
S2PModel decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const S2PModel& model, const std::filesystem::path& path);
S2PModel load_checkpoint(const std::filesystem::path& path);

}  // namespace s2p::model
