#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "events.hpp"
#include "hash.hpp"
#include "ledger.hpp"
#include "pulse.hpp"
#include "tx.hpp"

namespace lighthouse {

struct Violation {
  std::optional<std::uint64_t> round;  // unset for chain-level problems
  std::string field;
  std::string message;
};

struct Verdict {
  std::vector<Violation> violations;
  std::uint64_t rounds_checked = 0;
  std::uint64_t blocks_checked = 0;

  bool ok() const { return violations.empty(); }

  std::string report() const {
    std::ostringstream os;
    os << (ok() ? "PASS" : "FAIL") << ": " << rounds_checked << " rounds, " << blocks_checked
       << " blocks, " << violations.size() << " violations\n";
    for (const auto& v : violations) {
      if (v.round) {
        os << "  round " << *v.round << " ";
      } else {
        os << "  chain ";
      }
      os << v.field << ": " << v.message << "\n";
    }
    return os.str();
  }
};

struct VerifyOptions {
  Hasher hasher{};
  TimestampRule timestamp_rule = TimestampRule::kEquation;
  std::string owner = "owner";
  BlockNumber deregister_delay = 10;
  std::uint64_t max_index_gap = 1'000'000;
};

class LogParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<nlohmann::json> parse_json_lines(const std::string& text, const std::string& what) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw LogParseError(what + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<LighthousePulse> parse_pulse_log(const std::string& text) {
  std::vector<LighthousePulse> out;
  std::size_t n = 0;
  for (const auto& j : parse_json_lines(text, "pulse log")) {
    ++n;
    try {
      out.push_back(pulse_from_json(j));
    } catch (const std::exception& e) {
      throw LogParseError("pulse log record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Block> parse_block_log(const std::string& text) {
  std::vector<Block> out;
  std::size_t n = 0;
  for (const auto& j : parse_json_lines(text, "block log")) {
    ++n;
    try {
      out.push_back(block_from_summary(j));
    } catch (const std::exception& e) {
      throw LogParseError("block log record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// Recomputes a pulse log from public chain data alone. The block log is
// checked first as a hash chain (every header hash recomputed, every parent
// link followed); producer messages are then read out of the block
// transactions and every pulse field is re-derived from them.
inline Verdict verify_log(const std::vector<LighthousePulse>& pulses, const std::vector<Block>& blocks,
                          const VerifyOptions& opts = {}) {
  Verdict v;
  const Hasher& H = opts.hasher;
  auto chain_fail = [&](std::string field, std::string msg) {
    v.violations.push_back({std::nullopt, std::move(field), std::move(msg)});
  };

  struct Sent {
    BlockNumber block;
    Seconds u;
  };
  std::map<std::pair<std::string, Digest>, Sent> submits;  // first occurrence wins
  std::map<std::string, std::pair<Digest, Sent>> registrations;
  std::vector<BlockNumber> deregister_requests;

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    const std::string where = "block " + std::to_string(i);
    if (b.number != static_cast<BlockNumber>(i)) chain_fail(where + ".number", "not consecutive from 0");
    const Digest expected_parent = i == 0 ? Digest::zero() : blocks[i - 1].hash;
    if (b.parent_hash != expected_parent) chain_fail(where + ".parent_hex", "does not link to parent");
    if (i > 0 && b.timestamp < blocks[i - 1].timestamp) chain_fail(where + ".timestamp", "decreases");
    const Digest recomputed = block_header_hash(b.parent_hash, b.number, b.timestamp, b.nonce,
                                                tx_commitment(b.txs, H), H);
    if (recomputed != b.hash) chain_fail(where + ".hash_hex", "header hash does not recompute");
    for (std::size_t k = 0; k < b.txs.size(); ++k) {
      tx::Message m;
      try {
        m = tx::decode(b.txs[k]);
      } catch (const std::exception& e) {
        chain_fail(where + ".txs[" + std::to_string(k) + "]", e.what());
        continue;
      }
      if (auto* s = std::get_if<tx::Submit>(&m)) {
        submits.try_emplace({s->sender, s->v}, Sent{b.number, s->u});
      } else if (auto* r = std::get_if<tx::Register>(&m); r && r->caller == opts.owner) {
        registrations.try_emplace(r->producer, std::make_pair(r->v, Sent{b.number, r->u}));
      } else if (auto* d = std::get_if<tx::Deregister>(&m); d && d->caller == opts.owner) {
        deregister_requests.push_back(b.number);
      }
    }
  }
  v.blocks_checked = blocks.size();

  auto block_at = [&](BlockNumber k) -> const Block* {
    if (k < 0 || k >= static_cast<BlockNumber>(blocks.size())) return nullptr;
    return &blocks[static_cast<std::size_t>(k)];
  };

  // A deregistration takes effect at the first contract activity on or after
  // request + delay, and may complete the round there.
  std::set<BlockNumber> removal_blocks;
  for (BlockNumber req : deregister_requests) {
    for (BlockNumber k = req + opts.deregister_delay; k < static_cast<BlockNumber>(blocks.size()); ++k) {
      if (!blocks[static_cast<std::size_t>(k)].txs.empty()) {
        removal_blocks.insert(k);
        break;
      }
    }
  }

  // Latest (index, V) seen per producer, seeded from its registration as V_1.
  std::map<std::string, std::pair<std::uint64_t, Digest>> last_seen;
  for (const auto& [name, reg] : registrations) last_seen[name] = {1, reg.first};

  std::optional<BlockNumber> prev_block;
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const LighthousePulse& p = pulses[i];
    const std::uint64_t round = i;
    auto fail = [&](std::string field, std::string msg) {
      v.violations.push_back({round, std::move(field), std::move(msg)});
    };

    if (p.round != round) fail("round", "expected " + std::to_string(round));
    if (p.beacons.empty()) {
      fail("beacons", "empty");
      continue;
    }

    const BlockNumber used = p.beacons.front().block_used;
    const Block* used_block = block_at(used);
    const Block* anchor_block = block_at(used - 1);
    const Block* pulse_block = block_at(p.block);
    if (!used_block || !anchor_block) fail("beacons.block_used", "block " + std::to_string(used) + " not on chain");
    if (!pulse_block) fail("block", "block " + std::to_string(p.block) + " not on chain");
    if (prev_block) {
      if (p.block < *prev_block + 2) fail("block", "less than 2 blocks after the previous pulse");
      if (used < *prev_block + 1) fail("beacons.block_used", "precedes the previous pulse");
    }

    Digest xor_r;
    Seconds max_t = p.beacons.front().t;
    BlockNumber last_arrival = -1;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < p.beacons.size(); ++k) {
      const BeaconPulse& b = p.beacons[k];
      const std::string bf = "beacons[" + std::to_string(k) + "]";
      xor_r ^= b.r;
      max_t = std::max(max_t, b.t);
      if (!seen.insert(b.producer).second) fail(bf + ".producer", "appears twice in one round");
      if (b.block_used != used) fail(bf + ".block_used", "differs within the round");

      if (used_block && H(b.v, used_block->hash) != b.r) {
        fail(bf + ".R", "does not equal hash(V || BH(block_used))");
      }

      auto sent = submits.find({b.producer, b.v});
      if (sent == submits.end()) {
        fail(bf + ".V", "no message from " + b.producer + " carries this V");
      } else {
        const BlockNumber arrived = sent->second.block;
        last_arrival = std::max(last_arrival, arrived);
        if (arrived < used + 1) fail(bf + ".V", "revealed before the round block was mined");
        if (arrived > p.block) fail(bf + ".V", "revealed after the pulse");
        std::optional<Seconds> expected_t;
        if (opts.timestamp_rule == TimestampRule::kEquation) {
          if (anchor_block) expected_t = std::min(anchor_block->timestamp, sent->second.u);
        } else {
          // Previous message is the one that revealed hash(V).
          const Digest prev_v = H(b.v);
          std::optional<Sent> prev;
          if (auto it = submits.find({b.producer, prev_v}); it != submits.end()) prev = it->second;
          auto reg = registrations.find(b.producer);
          if (reg != registrations.end() && reg->second.first == prev_v) prev = reg->second.second;
          if (prev) {
            if (const Block* pb = block_at(prev->block)) expected_t = std::min(prev->u, pb->timestamp);
          } else {
            fail(bf + ".T", "no previous message to take the timestamp from");
          }
        }
        if (expected_t && *expected_t != b.t) {
          fail(bf + ".T", "expected " + std::to_string(*expected_t));
        }
      }

      auto prev = last_seen.find(b.producer);
      if (prev == last_seen.end()) {
        fail(bf + ".producer", b.producer + " was never registered");
      } else {
        const auto [prev_index, prev_v] = prev->second;
        if (b.index <= prev_index) {
          fail(bf + ".index", "does not advance past " + std::to_string(prev_index));
        } else if (b.index - prev_index > opts.max_index_gap) {
          fail(bf + ".index", "gap too large to check");
        } else if (H.iterate(b.v, b.index - prev_index) != prev_v) {
          fail(bf + ".index", "V does not hash back to the producer's previous value");
        }
        prev->second = {b.index, b.v};
      }
    }

    if (p.r != xor_r) fail("R_L", "is not the XOR of the beacon outputs");
    if (p.r.is_zero()) fail("R_L", "zero output must never be published");
    if (p.t != max_t) fail("T_L", "is not the max of the beacon timestamps");
    if (last_arrival >= 0 && p.block != last_arrival &&
        !(p.block > last_arrival && removal_blocks.count(p.block))) {
      fail("block", "expected " + std::to_string(last_arrival) + ", the last contributing message");
    }
    if (pulse_block && p.t > pulse_block->timestamp) fail("T_L", "later than the emitting block");
    prev_block = p.block;
  }
  v.rounds_checked = pulses.size();
  return v;
}

inline Verdict verify_log_text(const std::string& pulse_text, const std::string& block_text,
                               const VerifyOptions& opts = {}) {
  return verify_log(parse_pulse_log(pulse_text), parse_block_log(block_text), opts);
}

}  // namespace lighthouse
