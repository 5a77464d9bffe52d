#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "s2p/nn/tensor.hpp"

namespace s2p::nn {

/// Little-endian binary encoder. Doubles are written as their IEEE-754 bit
/// pattern so a decode reproduces them exactly.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void raw(std::string_view bytes);
  /// u32 length prefix + bytes.
  void str(std::string_view s);
  /// u32 rank, u64 extents, then f64 values.
  void tensor(const Tensor& t);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked decoder; running off the end throws FormatError.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string raw(std::size_t n);
  std::string str();
  Tensor tensor();

  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const;

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace s2p::nn
