#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lighthouse {

using Bytes = std::vector<std::uint8_t>;

inline std::uint8_t hex_nibble(char c) {
  if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
  if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
  if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
  throw std::invalid_argument(std::string("invalid hex character '") + c + "'");
}

// 32-byte hash value. Carries V, R, R_L and block hashes.
struct Digest {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  static Digest zero() { return Digest{}; }

  bool is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
  }

  // Bit i lives in byte i / 8, counted from the least significant bit.
  bool bit(unsigned i) const { return (bytes[(i / 8) % kSize] >> (i % 8)) & 1u; }

  Digest& operator^=(const Digest& other) {
    for (std::size_t i = 0; i < kSize; ++i) bytes[i] ^= other.bytes[i];
    return *this;
  }
  friend Digest operator^(Digest a, const Digest& b) { return a ^= b; }
  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;

  std::span<const std::uint8_t> span() const { return bytes; }

  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(kSize * 2, '0');
    for (std::size_t i = 0; i < kSize; ++i) {
      out[2 * i] = kDigits[bytes[i] >> 4];
      out[2 * i + 1] = kDigits[bytes[i] & 0x0f];
    }
    return out;
  }

  // Accepts exactly 64 hex characters; upper case is tolerated on input.
  static Digest from_hex(std::string_view text) {
    if (text.size() != kSize * 2) {
      throw std::invalid_argument("digest hex must be 64 characters, got " +
                                  std::to_string(text.size()));
    }
    Digest d;
    for (std::size_t i = 0; i < kSize; ++i) {
      d.bytes[i] = static_cast<std::uint8_t>((hex_nibble(text[2 * i]) << 4) | hex_nibble(text[2 * i + 1]));
    }
    return d;
  }
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(h); ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};

inline void append(Bytes& out, std::span<const std::uint8_t> data) {
  out.insert(out.end(), data.begin(), data.end());
}

inline void append(Bytes& out, const Digest& d) { append(out, d.span()); }

// Big-endian, fixed 8 bytes.
inline void append_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void append_i64(Bytes& out, std::int64_t v) { append_u64(out, static_cast<std::uint64_t>(v)); }

inline void append_str(Bytes& out, std::string_view s) {
  append_u64(out, s.size());
  out.insert(out.end(), s.begin(), s.end());
}

inline std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(std::string_view text) {
  if (text.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((hex_nibble(text[2 * i]) << 4) | hex_nibble(text[2 * i + 1]));
  }
  return out;
}

}  // namespace lighthouse
