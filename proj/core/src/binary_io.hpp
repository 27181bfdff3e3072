#pragma once

// Little-endian primitives shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ctp/error.hpp"

namespace ctp::detail {

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

 private:
  void put(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, n);
  }

  std::ostream& out_;
};

/// Throws CorruptFile on short reads.
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    std::string s;
    // Grow in chunks so a corrupt length cannot trigger a huge allocation.
    constexpr std::size_t kChunk = 1 << 20;
    while (s.size() < n) {
      const std::size_t take = std::min(kChunk, n - s.size());
      const std::size_t old = s.size();
      s.resize(old + take);
      in_.read(s.data() + old, static_cast<std::streamsize>(take));
      if (static_cast<std::size_t>(in_.gcount()) != take) fail();
    }
    return s;
  }
  std::string str() { return bytes(u32()); }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
  [[noreturn]] void fail() const { throw CorruptFile(what_ + ": unexpected end of data"); }

 private:
  std::uint64_t get(int n) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), n);
    if (in_.gcount() != n) fail();
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }

  std::istream& in_;
  std::string what_;
};

}  // namespace ctp::detail
