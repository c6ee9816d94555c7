#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "contract.hpp"
#include "digest.hpp"
#include "hash.hpp"
#include "ledger.hpp"
#include "merlin.hpp"

namespace lighthouse {

// Predicates see a single digest and nothing else.
struct BitPredicate {
  unsigned bit = 0;
  bool desired = true;

  bool operator()(const Digest& d) const { return d.bit(bit) == desired; }

  void validate() const {
    if (bit > 255) throw std::invalid_argument("bit index must be in [0, 255]");
  }
};

// Half-open block range [from, to) in which a producer sends nothing.
struct SilenceWindow {
  BlockNumber from = 0;
  BlockNumber to = 0;
};

namespace producer {

struct Honest {
  BlockNumber interval_blocks = 2;
};

// Predicts its own R_x from the already-mined round block hash and keeps V_x
// back while the predicate dislikes it. nullopt withholds forever.
struct Withholder {
  BlockNumber interval_blocks = 2;
  BitPredicate predicate;
  std::optional<BlockNumber> withhold_blocks;
};

// Sends delay_blocks later than an honest producer would.
struct Delayer {
  BlockNumber interval_blocks = 2;
  BlockNumber delay_blocks = 1;
};

// Members share one chain built from shared_seed.
struct CloneCoalition {
  std::string group;
  std::uint64_t shared_seed = 0;
  std::size_t member_count = 2;
  BlockNumber interval_blocks = 2;
};

}  // namespace producer

using ProducerStrategy =
    std::variant<producer::Honest, producer::Withholder, producer::Delayer, producer::CloneCoalition>;

inline BlockNumber interval_of(const ProducerStrategy& s) {
  return std::visit([](const auto& v) { return v.interval_blocks; }, s);
}

inline void validate(const ProducerStrategy& s) {
  if (interval_of(s) < 1) throw std::invalid_argument("interval_blocks must be >= 1");
  if (auto* w = std::get_if<producer::Withholder>(&s)) {
    w->predicate.validate();
    if (w->withhold_blocks && *w->withhold_blocks < 1) {
      throw std::invalid_argument("withhold_blocks must be >= 1");
    }
  }
  if (auto* d = std::get_if<producer::Delayer>(&s); d && d->delay_blocks < 0) {
    throw std::invalid_argument("delay_blocks must be >= 0");
  }
  if (auto* c = std::get_if<producer::CloneCoalition>(&s); c && c->member_count < 2) {
    throw std::invalid_argument("clone coalition needs at least 2 members");
  }
}

// What a producer can see before the next block: the chain, the contract's
// public state, and the fate of its own last message.
struct PublicView {
  BlockNumber next_block = 0;  // the block the message would land in
  Seconds clock = 0;           // producer's wall clock, sent as U
  BlockNumber anchor = 0;      // B(R_y)
  std::optional<Digest> target_hash;
  bool pulsed_this_round = false;
};

// Per-producer bookkeeping carried between decisions.
struct ProducerMemory {
  std::optional<BlockNumber> last_send;
  bool last_invalid = false;
  std::optional<BlockNumber> withheld_since;
  std::uint64_t withheld_rounds = 0;
  BlockNumber last_withheld_anchor = -1;
};

struct Message {
  Digest v;
  Seconds u = 0;
};

inline bool silent_at(const std::vector<SilenceWindow>& windows, BlockNumber b) {
  for (const auto& w : windows) {
    if (b >= w.from && b < w.to) return true;
  }
  return false;
}

// Decides whether to release the next chain value into `view.next_block`.
// Releasing advances the chain cursor.
inline std::optional<Message> producer_act(const ProducerStrategy& strategy, const PublicView& view,
                                           MerlinChain& chain, ProducerMemory& mem,
                                           const std::vector<SilenceWindow>& silence = {}) {
  const BlockNumber b = view.next_block;
  if (silent_at(silence, b) || view.pulsed_this_round || chain.exhausted()) return std::nullopt;

  BlockNumber earliest = view.anchor + 2;
  if (auto* d = std::get_if<producer::Delayer>(&strategy)) earliest += d->delay_blocks;
  if (b < earliest) return std::nullopt;
  if (mem.last_send && !mem.last_invalid && b - *mem.last_send < interval_of(strategy)) {
    return std::nullopt;
  }

  if (auto* w = std::get_if<producer::Withholder>(&strategy)) {
    // The round hash is mined by now, so R_x is already known to us.
    if (view.target_hash && !w->predicate(chain.hasher()(chain.peek(), *view.target_hash))) {
      if (mem.last_withheld_anchor != view.anchor) {
        ++mem.withheld_rounds;
        mem.last_withheld_anchor = view.anchor;
        mem.withheld_since = b;
      }
      if (!w->withhold_blocks || b - *mem.withheld_since < *w->withhold_blocks) return std::nullopt;
    }
  }

  auto release = chain.next();
  mem.last_send = b;
  mem.last_invalid = false;
  return Message{release.value, view.clock};
}

namespace miner {

struct HonestMining {};

// Discards coalition blocks whose hash bit differs from the wanted value.
struct BitBias {
  BitPredicate predicate;
};

// Knows the colluding producers' next values and judges the candidate by the
// beacon output it would produce: XOR over colluders of hash(V || candidate).
struct ProducerColluder {
  std::vector<std::string> producers;
  BitPredicate predicate;
};

}  // namespace miner

using MinerStrategy = std::variant<miner::HonestMining, miner::BitBias, miner::ProducerColluder>;

inline void validate(const MinerStrategy& s) {
  if (auto* b = std::get_if<miner::BitBias>(&s)) b->predicate.validate();
  if (auto* c = std::get_if<miner::ProducerColluder>(&s)) {
    c->predicate.validate();
    if (c->producers.empty()) {
      throw std::invalid_argument("producer_colluder needs at least one colluding producer");
    }
  }
}

struct MinerKnowledge {
  bool is_round_block = false;     // candidate is BH(B(R_y)+1)
  std::vector<Digest> next_values; // colluders' unreleased V
};

enum class Decision { kPublish, kDiscard };

inline Decision miner_decide(const MinerStrategy& strategy, const Block& candidate,
                             const MinerKnowledge& knowledge, const Hasher& hasher) {
  if (auto* b = std::get_if<miner::BitBias>(&strategy)) {
    return b->predicate(candidate.hash) ? Decision::kPublish : Decision::kDiscard;
  }
  if (auto* c = std::get_if<miner::ProducerColluder>(&strategy)) {
    if (!knowledge.is_round_block || knowledge.next_values.empty()) return Decision::kPublish;
    Digest r;
    for (const auto& v : knowledge.next_values) r ^= hasher(v, candidate.hash);
    return c->predicate(r) ? Decision::kPublish : Decision::kDiscard;
  }
  return Decision::kPublish;
}

}  // namespace lighthouse
