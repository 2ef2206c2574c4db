#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "beac/crypto.hpp"

namespace beac {

// Fixed-width big-endian integers, u32 length prefixes for variable data.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_be(v, 2); }
  void u32(std::uint32_t v) { put_be(v, 4); }
  void u64(std::uint64_t v) { put_be(v, 8); }
  void raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
  void bytes(ByteView data);
  void string(std::string_view s) { bytes(as_bytes(s)); }

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  void put_be(std::uint64_t v, int width) {
    for (int shift = (width - 1) * 8; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }

  Bytes out_;
};

// Reader over an externally owned buffer. Every failure throws
// Error(kParse) carrying the absolute byte offset.
class ByteReader {
 public:
  explicit ByteReader(ByteView data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  std::uint8_t u8();
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_be(4)); }
  std::uint64_t u64() { return get_be(8); }
  ByteView raw(std::size_t count);
  Bytes bytes();
  std::string string();

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    auto view = raw(N);
    std::array<std::uint8_t, N> out{};
    std::copy(view.begin(), view.end(), out.begin());
    return out;
  }

  std::size_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::uint64_t get_be(int width);

  ByteView data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace beac
