#include "beac/codec.hpp"

#include <limits>

#include "beac/error.hpp"

namespace beac {

void ByteWriter::bytes(ByteView data) {
  if (data.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kConsistency, "field exceeds 4 GiB");
  }
  u32(static_cast<std::uint32_t>(data.size()));
  raw(data);
}

std::uint8_t ByteReader::u8() {
  if (remaining() < 1) fail("unexpected end of data reading u8");
  return data_[pos_++];
}

ByteView ByteReader::raw(std::size_t count) {
  if (remaining() < count) {
    fail("unexpected end of data: need " + std::to_string(count) +
         " bytes, have " + std::to_string(remaining()));
  }
  auto view = data_.subspan(pos_, count);
  pos_ += count;
  return view;
}

Bytes ByteReader::bytes() {
  auto len = u32();
  auto view = raw(len);
  return Bytes(view.begin(), view.end());
}

std::string ByteReader::string() {
  auto len = u32();
  auto view = raw(len);
  return std::string(view.begin(), view.end());
}

std::uint64_t ByteReader::get_be(int width) {
  auto view = raw(static_cast<std::size_t>(width));
  std::uint64_t v = 0;
  for (auto b : view) v = v << 8 | b;
  return v;
}

void ByteReader::fail(const std::string& what) const {
  throw Error(ErrorCode::kParse, what + " at byte " + std::to_string(offset()));
}

}  // namespace beac
