#include "s2p/model/checkpoint.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <string_view>

#include <zlib.h>

#include "s2p/error.hpp"
#include "s2p/nn/serialize.hpp"

namespace s2p::model {

namespace {

constexpr std::string_view kMagic("S2PCKPT\0", 8);

std::uint32_t checksum(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_group(nn::ByteWriter& w, const std::vector<nn::Parameter>& group) {
  w.u32(static_cast<std::uint32_t>(group.size()));
  for (const auto& p : group) {
    w.str(p.name);
    w.u8(p.trainable ? 1 : 0);
    w.tensor(p.value);
  }
}

void read_group(nn::ByteReader& r, std::vector<nn::Parameter>& group, const std::string& layer) {
  const std::uint32_t count = r.u32();
  if (count != group.size()) {
    throw FormatError("checkpoint: layer '" + layer + "' stores " + std::to_string(count) + " tensors, architecture has " +
                      std::to_string(group.size()));
  }
  for (auto& p : group) {
    const std::string name = r.str();
    if (name != p.name) throw FormatError("checkpoint: expected tensor '" + p.name + "', found '" + name + "'");
    p.trainable = r.u8() != 0;
    nn::Tensor t = r.tensor();
    if (t.shape() != p.value.shape()) {
      throw FormatError("checkpoint: tensor '" + name + "' has shape " + nn::shape_string(t.shape()) + ", expected " +
                        nn::shape_string(p.value.shape()));
    }
    p.value = std::move(t);
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const S2PModel& model) {
  nn::ByteWriter payload;
  payload.str(nlohmann::json(model.arch).dump());
  payload.str(nlohmann::json(model.normalization).dump());
  payload.u32(static_cast<std::uint32_t>(model.interval_minutes));
  payload.str(model.metadata.dump());
  payload.u32(static_cast<std::uint32_t>(model.net.size()));
  for (std::size_t i = 0; i < model.net.size(); ++i) {
    const nn::Layer& l = model.net.layer(i);
    payload.str(l.name());
    write_group(payload, l.parameters());
    write_group(payload, l.buffers());
  }

  const auto& body = payload.bytes();
  nn::ByteWriter out;
  out.raw(kMagic);
  out.u32(kCheckpointVersion);
  out.u64(body.size());
  out.raw(std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
  out.u32(checksum(body.data(), body.size()));
  return out.bytes();
}

S2PModel decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  nn::ByteReader head(bytes.data(), bytes.size());
  if (bytes.size() < kMagic.size() || head.raw(kMagic.size()) != kMagic) {
    throw FormatError("checkpoint: not an S2PCKPT file (bad magic)");
  }
  const std::uint32_t version = head.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t length = head.u64();
  if (head.remaining() < 4 || length != head.remaining() - 4) {
    throw FormatError("checkpoint: payload length does not match file size (truncated or corrupt)");
  }
  const std::size_t offset = bytes.size() - head.remaining();
  const std::uint8_t* body = bytes.data() + offset;
  nn::ByteReader tail(body + length, 4);
  if (tail.u32() != checksum(body, length)) throw FormatError("checkpoint: checksum mismatch (corrupt file)");

  nn::ByteReader r(body, length);
  try {
    const ArchConfig arch = nlohmann::json::parse(r.str()).get<ArchConfig>();
    S2PModel m = S2PModel::build(arch, 0);
    m.normalization = nlohmann::json::parse(r.str()).get<data::NormalizationSpec>();
    m.interval_minutes = static_cast<int>(r.u32());
    m.metadata = nlohmann::json::parse(r.str());
    const std::uint32_t layers = r.u32();
    if (layers != m.net.size()) throw FormatError("checkpoint: layer count does not match the architecture");
    for (std::size_t i = 0; i < m.net.size(); ++i) {
      nn::Layer& l = m.net.layer(i);
      const std::string name = r.str();
      if (name != l.name()) throw FormatError("checkpoint: expected layer '" + l.name() + "', found '" + name + "'");
      read_group(r, l.parameters(), name);
      read_group(r, l.buffers(), name);
    }
    if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes after the last layer");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const S2PModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

S2PModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace s2p::model
