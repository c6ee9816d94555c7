#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "digest.hpp"

namespace lighthouse::keccak {

namespace detail {

inline constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

// rho offsets and pi lane order, walked along the pi cycle starting at lane 1.
inline constexpr std::array<unsigned, 24> kRho = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                                  27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
inline constexpr std::array<unsigned, 24> kPi = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                                 15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

constexpr std::uint64_t rotl(std::uint64_t x, unsigned n) { return (x << n) | (x >> (64 - n)); }

inline void permute(std::array<std::uint64_t, 25>& a) {
  for (std::uint64_t rc : kRoundConstants) {
    std::uint64_t c[5];
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
    }
    std::uint64_t carry = a[1];
    for (int i = 0; i < 24; ++i) {
      std::uint64_t tmp = a[kPi[i]];
      a[kPi[i]] = rotl(carry, kRho[i]);
      carry = tmp;
    }
    for (int y = 0; y < 25; y += 5) {
      std::uint64_t row[5];
      for (int x = 0; x < 5; ++x) row[x] = a[y + x];
      for (int x = 0; x < 5; ++x) a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
    }
    a[0] ^= rc;
  }
}

inline std::uint64_t load_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace detail

// 256-bit sponge (rate 136 bytes). `domain` is the padding suffix:
// 0x06 for FIPS 202 SHA3-256, 0x01 for original Keccak-256.
inline Digest sponge256(std::span<const std::uint8_t> input, std::uint8_t domain) {
  constexpr std::size_t kRate = 136;
  std::array<std::uint64_t, 25> state{};

  auto absorb = [&](const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate / 8; ++i) state[i] ^= detail::load_le(block + 8 * i);
    detail::permute(state);
  };

  std::size_t offset = 0;
  for (; input.size() - offset >= kRate; offset += kRate) absorb(input.data() + offset);

  std::uint8_t last[kRate] = {};
  std::size_t rest = input.size() - offset;
  if (rest > 0) std::memcpy(last, input.data() + offset, rest);
  last[rest] ^= domain;
  last[kRate - 1] ^= 0x80;
  absorb(last);

  Digest out;
  for (std::size_t i = 0; i < Digest::kSize; ++i) {
    out.bytes[i] = static_cast<std::uint8_t>(state[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

inline Digest sha3_256(std::span<const std::uint8_t> input) { return sponge256(input, 0x06); }
inline Digest keccak_256(std::span<const std::uint8_t> input) { return sponge256(input, 0x01); }

}  // namespace lighthouse::keccak
