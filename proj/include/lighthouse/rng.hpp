#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "digest.hpp"
#include "hash.hpp"

namespace lighthouse {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter scheme for sub-seeds: fold each counter into the master seed with
// splitmix64. derive_seed(m, {a, b}) depends only on (m, a, b), so a trial's
// stream is the same whether trials run serially or in parallel.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (auto p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) h = (h ^ c) * 0x100000001b3ULL;
  return derive_seed(master, {h});
}

// Deterministic generator. mt19937_64 output is fixed by the standard and the
// floating-point transforms below are done by hand, so streams are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  Digest digest() {
    Digest d;
    for (std::size_t i = 0; i < Digest::kSize; i += 8) {
      std::uint64_t v = engine_();
      for (std::size_t j = 0; j < 8; ++j) d.bytes[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return d;
  }

 private:
  std::mt19937_64 engine_;
};

// Producer seeds are derived, never sampled from a live generator.
inline Digest seed_digest(std::uint64_t master, std::string_view label, const Hasher& hasher = {}) {
  Bytes buf;
  append_u64(buf, master);
  append_str(buf, label);
  return hasher(buf);
}

}  // namespace lighthouse
