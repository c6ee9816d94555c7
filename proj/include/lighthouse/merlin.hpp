#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "digest.hpp"
#include "hash.hpp"

namespace lighthouse {

class ChainExhausted : public std::runtime_error {
 public:
  ChainExhausted() : std::runtime_error("merlin chain exhausted; provision a new chain") {}
};

struct ChainCheckpoint {
  Digest seed;
  std::uint64_t length = 0;
  std::uint64_t released_up_to = 0;

  friend bool operator==(const ChainCheckpoint&, const ChainCheckpoint&) = default;
};

struct Release {
  std::uint64_t index;
  Digest value;
};

// Reverse hash chain V_1 <- V_2 <- ... <- V_n with V_n = seed and
// V_x = hash(V_{x+1}). Values are released in index order from V_1, so every
// released value commits its owner to the next one.
class MerlinChain {
 public:
  MerlinChain(const Digest& seed, std::uint64_t length, Hasher hasher = {})
      : seed_(seed), hasher_(hasher) {
    if (length == 0) throw std::invalid_argument("merlin chain length must be at least 1");
    values_.resize(length);
    values_[length - 1] = seed;
    for (std::uint64_t x = length - 1; x > 0; --x) values_[x - 1] = hasher_(values_[x]);
  }

  std::uint64_t length() const { return values_.size(); }
  std::uint64_t cursor() const { return cursor_; }
  const Digest& seed() const { return seed_; }
  const Hasher& hasher() const { return hasher_; }
  bool exhausted() const { return cursor_ > length(); }
  std::uint64_t remaining() const { return length() + 1 - cursor_; }

  // 1-based, as in V_1..V_n.
  const Digest& value(std::uint64_t index) const {
    if (index == 0 || index > length()) {
      throw std::out_of_range("merlin index " + std::to_string(index) + " outside 1.." +
                              std::to_string(length()));
    }
    return values_[index - 1];
  }

  // The value the next call to next() returns, without releasing it.
  const Digest& peek() const {
    if (exhausted()) throw ChainExhausted();
    return values_[cursor_ - 1];
  }

  Release next() {
    if (exhausted()) throw ChainExhausted();
    Release r{cursor_, values_[cursor_ - 1]};
    ++cursor_;
    return r;
  }

  ChainCheckpoint checkpoint() const { return {seed_, length(), cursor_ - 1}; }

  static MerlinChain recover(const ChainCheckpoint& cp, Hasher hasher = {}) {
    if (cp.released_up_to > cp.length) {
      throw std::invalid_argument("checkpoint released_up_to exceeds chain length");
    }
    MerlinChain chain(cp.seed, cp.length, hasher);
    chain.cursor_ = cp.released_up_to + 1;
    return chain;
  }

  friend bool operator==(const MerlinChain& a, const MerlinChain& b) {
    return a.cursor_ == b.cursor_ && a.values_ == b.values_ && a.hasher_ == b.hasher_;
  }

 private:
  Digest seed_;
  Hasher hasher_;
  std::vector<Digest> values_;
  std::uint64_t cursor_ = 1;
};

// prev == hash(next): `next` is the successor that `prev` committed to.
inline bool merlin_link_ok(const Digest& prev, const Digest& next, const Hasher& hasher = {}) {
  return prev == hasher(next);
}

inline nlohmann::ordered_json to_json(const ChainCheckpoint& cp) {
  return {{"seed_hex", cp.seed.hex()}, {"length", cp.length}, {"released_up_to", cp.released_up_to}};
}

inline ChainCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("checkpoint must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "seed_hex" && it.key() != "length" && it.key() != "released_up_to") {
      throw std::invalid_argument("unknown checkpoint key '" + it.key() + "'");
    }
  }
  ChainCheckpoint cp;
  cp.seed = Digest::from_hex(j.at("seed_hex").get<std::string>());
  cp.length = j.at("length").get<std::uint64_t>();
  cp.released_up_to = j.at("released_up_to").get<std::uint64_t>();
  if (cp.length == 0) throw std::invalid_argument("checkpoint length must be at least 1");
  if (cp.released_up_to > cp.length) {
    throw std::invalid_argument("checkpoint released_up_to exceeds length");
  }
  return cp;
}

}  // namespace lighthouse
