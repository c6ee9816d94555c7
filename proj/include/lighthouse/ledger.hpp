#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "digest.hpp"
#include "hash.hpp"
#include "rng.hpp"

namespace lighthouse {

using BlockNumber = std::int64_t;
using Seconds = std::int64_t;

// Only the most recent kBlockHashWindow hashes are resolvable: [tip-255, tip].
inline constexpr BlockNumber kBlockHashWindow = 256;

struct Block {
  BlockNumber number = 0;
  Digest parent_hash;
  Digest hash;
  Seconds timestamp = 0;
  std::uint64_t nonce = 0;
  std::vector<Bytes> txs;
};

inline Digest tx_commitment(const std::vector<Bytes>& txs, const Hasher& hasher) {
  Bytes buf;
  append_u64(buf, txs.size());
  for (const auto& t : txs) append(buf, hasher(t));
  return hasher(buf);
}

inline Digest block_header_hash(const Digest& parent, BlockNumber number, Seconds timestamp,
                                std::uint64_t nonce, const Digest& tx_root, const Hasher& hasher) {
  Bytes buf;
  buf.reserve(2 * Digest::kSize + 24);
  append(buf, parent);
  append_i64(buf, number);
  append_i64(buf, timestamp);
  append_u64(buf, nonce);
  append(buf, tx_root);
  return hasher(buf);
}

// The contract's bounded window onto the chain.
class ChainView {
 public:
  BlockNumber tip_number() const { return tip_; }
  bool empty() const { return tip_ < 0; }

  bool resolvable(BlockNumber k) const {
    return tip_ >= 0 && k >= 0 && k <= tip_ && k > tip_ - kBlockHashWindow;
  }

  std::optional<Digest> block_hash(BlockNumber k) const {
    if (!resolvable(k)) return std::nullopt;
    return ring_[slot(k)].hash;
  }

  std::optional<Seconds> timestamp(BlockNumber k) const {
    if (!resolvable(k)) return std::nullopt;
    return ring_[slot(k)].timestamp;
  }

  Seconds tip_timestamp() const { return ring_[slot(tip_)].timestamp; }

  std::size_t resolvable_count() const {
    return empty() ? 0 : static_cast<std::size_t>(std::min<BlockNumber>(tip_ + 1, kBlockHashWindow));
  }

  void push(const Block& b) {
    if (b.number != tip_ + 1) throw std::logic_error("chain view must advance one block at a time");
    tip_ = b.number;
    ring_[slot(tip_)] = {b.hash, b.timestamp};
  }

 private:
  struct Entry {
    Digest hash;
    Seconds timestamp = 0;
  };
  static std::size_t slot(BlockNumber k) { return static_cast<std::size_t>(k % kBlockHashWindow); }

  BlockNumber tip_ = -1;
  std::array<Entry, kBlockHashWindow> ring_{};
};

struct MinerPool {
  double coalition_fraction = 0.0;
  double block_interval = 15.0;  // mean seconds per block
  std::uint64_t rng_seed = 0;
  std::uint64_t discard_cap = 10'000;
  Seconds genesis_time = 1'500'000'000;

  void validate() const {
    if (!(coalition_fraction >= 0.0 && coalition_fraction <= 1.0)) {
      throw std::invalid_argument("coalition fraction must be in [0, 1]");
    }
    if (!(block_interval >= 0.0)) throw std::invalid_argument("block interval must be >= 0");
    if (discard_cap == 0) throw std::invalid_argument("discard cap must be positive");
  }
};

class Livelock : public std::runtime_error {
 public:
  Livelock(BlockNumber number, std::uint64_t discards)
      : std::runtime_error("livelock at block " + std::to_string(number) + ": coalition discarded " +
                           std::to_string(discards) + " candidates in a row"),
        discards_(discards) {}
  std::uint64_t discards() const { return discards_; }

 private:
  std::uint64_t discards_;
};

// Coalition publication policy: true publishes the candidate, false discards it.
using PublishPolicy = std::function<bool(const Block& candidate)>;

inline bool publish_always(const Block&) { return true; }

struct CompetitionResult {
  Block block;
  std::uint64_t discards = 0;
  bool coalition_won = false;
};

// One block competition. Each sub-round the coalition wins with probability
// F; a coalition candidate the policy rejects is thrown away and the race
// restarts. Outside miners always publish.
template <typename Policy>
CompetitionResult mine_competition(Rng& rng, const MinerPool& pool, const Hasher& hasher,
                                   const Digest& parent, BlockNumber number, Seconds timestamp,
                                   std::vector<Bytes> txs, Policy&& policy) {
  CompetitionResult result;
  Block& candidate = result.block;
  candidate.number = number;
  candidate.parent_hash = parent;
  candidate.timestamp = timestamp;
  candidate.txs = std::move(txs);
  const Digest tx_root = tx_commitment(candidate.txs, hasher);

  for (;;) {
    const bool coalition = rng.bernoulli(pool.coalition_fraction);
    candidate.nonce = rng.next_u64();
    candidate.hash =
        block_header_hash(parent, number, timestamp, candidate.nonce, tx_root, hasher);
    if (!coalition || policy(static_cast<const Block&>(candidate))) {
      result.coalition_won = coalition;
      return result;
    }
    if (++result.discards >= pool.discard_cap) throw Livelock(number, result.discards);
  }
}

// Simulated proof-of-work chain: a single timeline of published blocks.
class Ledger {
 public:
  explicit Ledger(MinerPool pool, Hasher hasher = {}, bool keep_blocks = true)
      : pool_(pool), hasher_(hasher), rng_(pool.rng_seed), keep_blocks_(keep_blocks) {
    pool_.validate();
    Block genesis;
    genesis.number = 0;
    genesis.timestamp = pool_.genesis_time;
    genesis.nonce = rng_.next_u64();
    genesis.hash = block_header_hash(genesis.parent_hash, 0, genesis.timestamp, genesis.nonce,
                                     tx_commitment(genesis.txs, hasher_), hasher_);
    record(std::move(genesis));
  }

  const MinerPool& pool() const { return pool_; }
  const Hasher& hasher() const { return hasher_; }
  const ChainView& view() const { return view_; }
  const Block& tip() const { return tip_; }
  BlockNumber height() const { return tip_.number; }
  std::uint64_t total_discards() const { return total_discards_; }
  std::uint64_t coalition_blocks() const { return coalition_blocks_; }

  // Empty unless keep_blocks was set.
  const std::vector<Block>& blocks() const { return blocks_; }

  // Seconds to the next block: exponential with the configured mean, rounded
  // and floored at one second so timestamps strictly increase.
  Seconds draw_interval() {
    if (pool_.block_interval <= 0.0) return 0;
    return std::max<Seconds>(1, std::llround(rng_.exponential(pool_.block_interval)));
  }

  template <typename Policy>
  const Block& advance(std::vector<Bytes> txs, Policy&& policy) {
    const Seconds ts = tip_.timestamp + draw_interval();
    auto result = mine_competition(rng_, pool_, hasher_, tip_.hash, tip_.number + 1, ts,
                                   std::move(txs), std::forward<Policy>(policy));
    total_discards_ += result.discards;
    if (result.coalition_won) ++coalition_blocks_;
    record(std::move(result.block));
    return tip_;
  }

  const Block& advance(std::vector<Bytes> txs = {}) { return advance(std::move(txs), publish_always); }

 private:
  void record(Block b) {
    view_.push(b);
    if (keep_blocks_) blocks_.push_back(b);
    tip_ = std::move(b);
  }

  MinerPool pool_;
  Hasher hasher_;
  Rng rng_;
  bool keep_blocks_;
  ChainView view_;
  Block tip_;
  std::vector<Block> blocks_;
  std::uint64_t total_discards_ = 0;
  std::uint64_t coalition_blocks_ = 0;
};

// Block summary line: {number, hash_hex, timestamp} plus the header fields a
// verifier needs to recompute the hash.
inline nlohmann::ordered_json block_summary(const Block& b) {
  nlohmann::ordered_json txs = nlohmann::ordered_json::array();
  for (const auto& t : b.txs) txs.push_back(to_hex(t));
  return {{"number", b.number},     {"hash_hex", b.hash.hex()},       {"timestamp", b.timestamp},
          {"parent_hex", b.parent_hash.hex()}, {"nonce", b.nonce}, {"txs", std::move(txs)}};
}

inline Block block_from_summary(const nlohmann::json& j) {
  Block b;
  b.number = j.at("number").get<BlockNumber>();
  b.hash = Digest::from_hex(j.at("hash_hex").get<std::string>());
  b.timestamp = j.at("timestamp").get<Seconds>();
  b.parent_hash = Digest::from_hex(j.at("parent_hex").get<std::string>());
  b.nonce = j.at("nonce").get<std::uint64_t>();
  for (const auto& t : j.at("txs")) b.txs.push_back(from_hex(t.get<std::string>()));
  return b;
}

}  // namespace lighthouse
