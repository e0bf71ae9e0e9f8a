#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "esc/error.hpp"

namespace esc {

// Little-endian primitive encoding shared by the checkpoint and dataset
// formats. Byte order is fixed regardless of host endianness.

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }

  void f64s(std::span<const double> values) {
    for (double v : values) f64(v);
  }

  bool good() const { return out_.good(); }

 private:
  void put_le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, bytes);
  }

  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string context)
      : in_(in), context_(std::move(context)) {}

  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!in_ || got != tag) {
      throw IoError(context_ + ": bad magic, expected \"" + std::string(tag) + "\"");
    }
  }

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(get_le(8)); }

  void f64s(std::span<double> values) {
    for (double& v : values) v = f64();
  }

  /// True when the stream has no bytes left.
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::uint64_t get_le(int bytes) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), bytes);
    if (!in_) throw IoError(context_ + ": unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }

  std::istream& in_;
  std::string context_;
};

}  // namespace esc
