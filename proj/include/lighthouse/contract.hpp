#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "digest.hpp"
#include "events.hpp"
#include "hash.hpp"
#include "ledger.hpp"
#include "merlin.hpp"
#include "pulse.hpp"
#include "tx.hpp"

namespace lighthouse {

struct ContractConfig {
  std::string owner = "owner";
  BlockNumber deregister_delay = 10;
  // A round open this many blocks past its anchor is reported as stalled,
  // naming every producer that has not pulsed. 0 disables reporting.
  BlockNumber stall_blocks = 64;
  TimestampRule timestamp_rule = TimestampRule::kEquation;
  Hasher hasher{};

  void validate() const {
    if (owner.empty()) throw std::invalid_argument("contract owner must be non-empty");
    if (deregister_delay < 0) throw std::invalid_argument("deregister delay must be >= 0");
    if (stall_blocks < 0) throw std::invalid_argument("stall_blocks must be >= 0");
  }
};

enum class Outcome { kRejected, kAcceptedInvalid, kAcceptedValid };

struct SubmitResult {
  Outcome outcome = Outcome::kRejected;
  std::optional<LighthousePulse> pulse;  // set when this message completed a round
};

struct ProducerRecord {
  std::string address;
  Digest last_v;
  Seconds last_u = 0;
  BlockNumber last_v_block = 0;
  Seconds last_v_timestamp = 0;
  std::uint64_t last_index = 1;
  bool pulsed_this_round = false;
  std::optional<BeaconPulse> pending_pulse;
  std::optional<BlockNumber> deregister_at;
};

// Multi-producer lighthouse contract. Each producer runs the single-producer
// beacon rules; beacons pulse in lockstep and the lighthouse emits the XOR of
// a complete round.
//
// "anchor" is B(R_y): the block of the last lighthouse pulse, moved forward by
// a hash-expiry or zero-output reset. The round's block hash is always that of
// anchor + 1, and a message is only valid from anchor + 2 on.
class LighthouseContract {
 public:
  LighthouseContract(ContractConfig config, const ChainView& view) : config_(std::move(config)) {
    config_.validate();
    if (view.empty()) throw std::invalid_argument("contract deployed on an empty chain");
    set_anchor(view.tip_number(), view.tip_timestamp());
  }

  const ContractConfig& config() const { return config_; }
  const std::map<std::string, ProducerRecord>& producers() const { return producers_; }
  const std::vector<LighthousePulse>& history() const { return history_; }
  const std::vector<ContractEvent>& events() const { return events_; }
  BlockNumber anchor_block() const { return anchor_; }
  BlockNumber target_block() const { return anchor_ + 1; }
  const std::optional<Digest>& cached_target_hash() const { return cached_target_; }

  const ProducerRecord* producer(const std::string& name) const {
    auto it = producers_.find(name);
    return it == producers_.end() ? nullptr : &it->second;
  }

  // Any activity: apply due deregistrations, cache the round's block hash
  // while it is still resolvable, or report its expiry and reset.
  void touch(const ChainView& view) {
    const BlockNumber now = view.tip_number();
    const Seconds now_ts = view.tip_timestamp();

    std::vector<std::string> due;
    for (const auto& [name, rec] : producers_) {
      if (rec.deregister_at && *rec.deregister_at <= now) due.push_back(name);
    }
    for (const auto& name : due) {
      producers_.erase(name);
      emit(EventKind::kProducerDeregistered, now, "producer=" + name, {name});
    }
    if (!due.empty()) try_combine(now, now_ts);

    if (!cached_target_) {
      if (auto h = view.block_hash(target_block())) {
        cached_target_ = *h;
      } else if (target_block() <= now) {
        emit(EventKind::kHashExpired, now,
             "block hash " + std::to_string(target_block()) + " no longer retrievable; reset to " +
                 std::to_string(now + 1),
             {});
        set_anchor(now, now_ts);
      }
    }

    report_stall(now);
  }

  bool register_producer(const std::string& caller, const std::string& name, const Digest& v,
                                 Seconds u, const ChainView& view) {
    touch(view);
    const BlockNumber now = view.tip_number();
    if (caller != config_.owner) {
      emit(EventKind::kMessageRejected, now, "registration by non-owner " + caller, {caller});
      return false;
    }
    if (name.empty() || producers_.count(name)) {
      emit(EventKind::kMessageRejected, now, "duplicate or empty producer " + name, {name});
      return false;
    }
    ProducerRecord rec;
    rec.address = name;
    rec.last_v = v;
    rec.last_u = u;
    rec.last_v_block = now;
    rec.last_v_timestamp = view.tip_timestamp();
    producers_.emplace(name, rec);
    emit(EventKind::kProducerRegistered, now, "producer=" + name + " V=" + v.hex(), {name});
    return true;
  }

  bool request_deregister(const std::string& caller, const std::string& name, const ChainView& view) {
    touch(view);
    const BlockNumber now = view.tip_number();
    if (caller != config_.owner) {
      emit(EventKind::kMessageRejected, now, "deregistration by non-owner " + caller, {caller});
      return false;
    }
    auto it = producers_.find(name);
    if (it == producers_.end()) {
      emit(EventKind::kMessageRejected, now, "deregistration of unknown producer " + name, {name});
      return false;
    }
    if (!it->second.deregister_at) it->second.deregister_at = now + config_.deregister_delay;
    if (config_.deregister_delay == 0) touch(view);
    return true;
  }

  SubmitResult submit(const std::string& sender, const Digest& v, Seconds u, const ChainView& view) {
    touch(view);
    const BlockNumber now = view.tip_number();
    const Seconds now_ts = view.tip_timestamp();

    auto it = producers_.find(sender);
    if (it == producers_.end()) {
      emit(EventKind::kMessageRejected, now, "unregistered sender " + sender, {sender});
      return {};
    }
    ProducerRecord& rec = it->second;
    if (!merlin_link_ok(rec.last_v, v, config_.hasher)) {
      emit(EventKind::kMessageRejected, now, "broken merlin link from " + sender, {sender});
      return {};
    }

    const Seconds prev_u = rec.last_u;
    const Seconds prev_ts = rec.last_v_timestamp;
    rec.last_v = v;
    rec.last_u = u;
    rec.last_v_block = now;
    rec.last_v_timestamp = now_ts;
    ++rec.last_index;

    std::string why;
    if (now < anchor_ + 2) {
      why = "too early: block " + std::to_string(now) + " < " + std::to_string(anchor_ + 2);
    } else if (!cached_target_) {
      why = "block hash " + std::to_string(target_block()) + " unavailable";
    } else if (rec.pulsed_this_round) {
      why = "already pulsed this round";
    }
    if (!why.empty()) {
      emit(EventKind::kMessageInvalid, now, sender + ": " + why, {sender});
      return {Outcome::kAcceptedInvalid, std::nullopt};
    }

    BeaconPulse pulse;
    pulse.producer = sender;
    pulse.index = rec.last_index;
    pulse.v = v;
    pulse.r = config_.hasher(v, *cached_target_);
    pulse.t = config_.timestamp_rule == TimestampRule::kEquation ? std::min(anchor_timestamp_, u)
                                                                 : std::min(prev_u, prev_ts);
    pulse.block_used = target_block();
    rec.pending_pulse = pulse;
    rec.pulsed_this_round = true;

    return {Outcome::kAcceptedValid, try_combine(now, now_ts)};
  }

  // Pulses once every registered producer has pulsed this round.
  std::optional<LighthousePulse> try_combine(BlockNumber now, Seconds now_ts) {
    if (producers_.empty()) return std::nullopt;
    for (const auto& [name, rec] : producers_) {
      if (!rec.pulsed_this_round) return std::nullopt;
    }

    LighthousePulse out;
    out.round = history_.size();
    out.block = now;
    out.t = producers_.begin()->second.pending_pulse->t;
    for (const auto& [name, rec] : producers_) {
      out.r ^= rec.pending_pulse->r;
      out.t = std::max(out.t, rec.pending_pulse->t);
      out.beacons.push_back(*rec.pending_pulse);
    }

    for (auto& [name, rec] : producers_) {
      rec.pulsed_this_round = false;
      rec.pending_pulse.reset();
    }
    set_anchor(now, now_ts);

    if (out.r.is_zero()) {
      std::vector<std::string> names;
      for (const auto& b : out.beacons) names.push_back(b.producer);
      emit(EventKind::kZeroCombinedRefused, now, "combined output is zero; round voided", names);
      return std::nullopt;
    }
    emit(EventKind::kPulseEmitted, now,
         "round=" + std::to_string(out.round) + " R_L=" + out.r.hex(), {});
    history_.push_back(out);
    return out;
  }

  const LighthousePulse& get_pulse(std::size_t i, const ChainView& view) {
    touch(view);
    if (i >= history_.size()) {
      throw std::out_of_range("no lighthouse pulse with round " + std::to_string(i));
    }
    return history_[i];
  }

  std::optional<LighthousePulse> get_latest(const ChainView& view) {
    touch(view);
    if (history_.empty()) return std::nullopt;
    return history_.back();
  }

  SubmitResult apply(const tx::Message& msg, const ChainView& view) {
    return std::visit(
        [&](const auto& m) -> SubmitResult {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, tx::Register>) {
            register_producer(m.caller, m.producer, m.v, m.u, view);
            return {};
          } else if constexpr (std::is_same_v<T, tx::Deregister>) {
            request_deregister(m.caller, m.producer, view);
            return {};
          } else if constexpr (std::is_same_v<T, tx::Submit>) {
            return submit(m.sender, m.v, m.u, view);
          } else {
            get_latest(view);
            return {};
          }
        },
        msg);
  }

 private:
  void set_anchor(BlockNumber block, Seconds ts) {
    anchor_ = block;
    anchor_timestamp_ = ts;
    cached_target_.reset();
    last_stall_report_ = block;
  }

  void report_stall(BlockNumber now) {
    if (config_.stall_blocks == 0 || producers_.empty()) return;
    if (now - last_stall_report_ < config_.stall_blocks) return;
    std::vector<std::string> waiting;
    for (const auto& [name, rec] : producers_) {
      if (!rec.pulsed_this_round) waiting.push_back(name);
    }
    last_stall_report_ = now;
    emit(EventKind::kRoundStalled, now,
         "no pulse since block " + std::to_string(anchor_) + "; waiting_on=" + join(waiting), waiting);
  }

  void emit(EventKind kind, BlockNumber block, std::string detail, std::vector<std::string> subjects) {
    events_.push_back({kind, block, std::move(detail), std::move(subjects)});
  }

  ContractConfig config_;
  std::map<std::string, ProducerRecord> producers_;
  BlockNumber anchor_ = 0;
  Seconds anchor_timestamp_ = 0;
  std::optional<Digest> cached_target_;
  BlockNumber last_stall_report_ = 0;
  std::vector<LighthousePulse> history_;
  std::vector<ContractEvent> events_;
};

}  // namespace lighthouse
