#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "digest.hpp"
#include "keccak.hpp"

namespace lighthouse {

enum class HashVariant { kSha3_256, kKeccak256 };

inline std::string_view to_string(HashVariant v) {
  return v == HashVariant::kSha3_256 ? "sha3-256" : "keccak-256";
}

inline HashVariant parse_hash_variant(std::string_view name) {
  if (name == "sha3-256") return HashVariant::kSha3_256;
  if (name == "keccak-256") return HashVariant::kKeccak256;
  throw std::invalid_argument("unknown hash variant '" + std::string(name) +
                              "' (expected sha3-256 or keccak-256)");
}

// The single hash seam. Merlin chains, block hashes and pulse derivation all
// go through one Hasher so a run uses one function end to end.
class Hasher {
 public:
  constexpr Hasher() = default;
  constexpr explicit Hasher(HashVariant variant) : variant_(variant) {}

  HashVariant variant() const { return variant_; }

  Digest operator()(std::span<const std::uint8_t> input) const {
    return variant_ == HashVariant::kSha3_256 ? keccak::sha3_256(input) : keccak::keccak_256(input);
  }
  Digest operator()(const Digest& d) const { return (*this)(d.span()); }

  // hash(a || b)
  Digest operator()(const Digest& a, const Digest& b) const {
    std::uint8_t buf[2 * Digest::kSize];
    std::copy(a.bytes.begin(), a.bytes.end(), buf);
    std::copy(b.bytes.begin(), b.bytes.end(), buf + Digest::kSize);
    return (*this)(std::span<const std::uint8_t>(buf));
  }

  // Applies the hash `times` times.
  Digest iterate(Digest d, std::uint64_t times) const {
    for (std::uint64_t i = 0; i < times; ++i) d = (*this)(d);
    return d;
  }

  friend bool operator==(const Hasher&, const Hasher&) = default;

 private:
  HashVariant variant_ = HashVariant::kSha3_256;
};

}  // namespace lighthouse
