#include "s2p/nn/serialize.hpp"

#include <bit>
#include <limits>

#include "s2p/error.hpp"

namespace s2p::nn {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::raw(std::string_view bytes) { bytes_.insert(bytes_.end(), bytes.begin(), bytes.end()); }

void ByteWriter::str(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("string too long to encode");
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s);
}

void ByteWriter::tensor(const Tensor& t) {
  u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) u64(d);
  for (double v : t.values()) f64(v);
}

void ByteReader::need(std::size_t n) const {
  if (n > remaining()) {
    throw FormatError("truncated data: need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
                      ", have " + std::to_string(remaining()));
  }
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::raw(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
  pos_ += n;
  return s;
}

std::string ByteReader::str() { return raw(u32()); }

Tensor ByteReader::tensor() {
  const std::uint32_t rank = u32();
  if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " is implausible");
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& d : shape) {
    d = u64();
    if (d != 0 && count > remaining() / d) throw FormatError("tensor extents exceed the remaining data");
    count *= d;
  }
  need(count * 8);
  std::vector<double> data(count);
  for (double& v : data) v = f64();
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace s2p::nn
