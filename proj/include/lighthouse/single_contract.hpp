#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "contract.hpp"

namespace lighthouse {

// The one-producer beacon contract on its own: no lockstep and no combining.
// Every valid message pulses immediately with R = hash(V || BH(B(R_y)+1)).
// Kept separate from LighthouseContract so the two can be checked against
// each other.
class SingleProducerContract {
 public:
  SingleProducerContract(ContractConfig config, const ChainView& view) : config_(std::move(config)) {
    config_.validate();
    if (view.empty()) throw std::invalid_argument("contract deployed on an empty chain");
    last_pulse_block_ = view.tip_number();
    last_pulse_timestamp_ = view.tip_timestamp();
    stall_mark_ = view.tip_number();
  }

  const std::vector<LighthousePulse>& history() const { return history_; }
  const std::vector<ContractEvent>& events() const { return events_; }
  BlockNumber anchor_block() const { return last_pulse_block_; }
  BlockNumber target_block() const { return last_pulse_block_ + 1; }
  const std::optional<Digest>& cached_target_hash() const { return block_hash_; }
  const std::optional<ProducerRecord>& producer_record() const { return producer_; }

  const ProducerRecord* producer(const std::string& name) const {
    return producer_ && producer_->address == name ? &*producer_ : nullptr;
  }

  void touch(const ChainView& view) {
    const BlockNumber now = view.tip_number();
    if (producer_ && producer_->deregister_at && *producer_->deregister_at <= now) {
      events_.push_back({EventKind::kProducerDeregistered, now, "producer=" + producer_->address,
                         {producer_->address}});
      producer_.reset();
    }
    const BlockNumber wanted = last_pulse_block_ + 1;
    if (!block_hash_) {
      if (view.resolvable(wanted)) {
        block_hash_ = view.block_hash(wanted);
      } else if (now >= wanted) {
        events_.push_back({EventKind::kHashExpired, now,
                           "block hash " + std::to_string(wanted) +
                               " no longer retrievable; reset to " + std::to_string(now + 1),
                           {}});
        last_pulse_block_ = now;
        last_pulse_timestamp_ = view.tip_timestamp();
        stall_mark_ = now;
      }
    }
    if (config_.stall_blocks > 0 && producer_ && now - stall_mark_ >= config_.stall_blocks) {
      stall_mark_ = now;
      events_.push_back({EventKind::kRoundStalled, now,
                         "no pulse since block " + std::to_string(last_pulse_block_) +
                             "; waiting_on=" + producer_->address,
                         {producer_->address}});
    }
  }

  bool register_producer(const std::string& caller, const std::string& name, const Digest& v,
                         Seconds u, const ChainView& view) {
    touch(view);
    const BlockNumber now = view.tip_number();
    if (caller != config_.owner || producer_ || name.empty()) {
      events_.push_back({EventKind::kMessageRejected, now, "registration refused for " + name, {name}});
      return false;
    }
    ProducerRecord rec;
    rec.address = name;
    rec.last_v = v;
    rec.last_u = u;
    rec.last_v_block = now;
    rec.last_v_timestamp = view.tip_timestamp();
    producer_ = rec;
    events_.push_back(
        {EventKind::kProducerRegistered, now, "producer=" + name + " V=" + v.hex(), {name}});
    return true;
  }

  bool request_deregister(const std::string& caller, const std::string& name, const ChainView& view) {
    touch(view);
    if (caller != config_.owner || !producer_ || producer_->address != name) {
      events_.push_back(
          {EventKind::kMessageRejected, view.tip_number(), "deregistration refused for " + name, {name}});
      return false;
    }
    if (!producer_->deregister_at) producer_->deregister_at = view.tip_number() + config_.deregister_delay;
    if (config_.deregister_delay == 0) touch(view);
    return true;
  }

  SubmitResult submit(const std::string& sender, const Digest& v, Seconds u, const ChainView& view) {
    touch(view);
    const BlockNumber now = view.tip_number();
    if (!producer_ || producer_->address != sender) {
      events_.push_back({EventKind::kMessageRejected, now, "unregistered sender " + sender, {sender}});
      return {};
    }
    if (producer_->last_v != config_.hasher(v)) {
      events_.push_back(
          {EventKind::kMessageRejected, now, "broken merlin link from " + sender, {sender}});
      return {};
    }

    ProducerRecord& rec = *producer_;
    const Seconds prev_u = rec.last_u;
    const Seconds prev_ts = rec.last_v_timestamp;
    rec.last_v = v;
    rec.last_u = u;
    rec.last_v_block = now;
    rec.last_v_timestamp = view.tip_timestamp();
    rec.last_index += 1;

    if (now < last_pulse_block_ + 2 || !block_hash_) {
      events_.push_back({EventKind::kMessageInvalid, now, sender + ": not valid for a pulse", {sender}});
      return {Outcome::kAcceptedInvalid, std::nullopt};
    }

    LighthousePulse out;
    out.round = history_.size();
    out.block = now;
    BeaconPulse b;
    b.producer = sender;
    b.index = rec.last_index;
    b.v = v;
    b.block_used = last_pulse_block_ + 1;
    b.r = config_.hasher(v, *block_hash_);
    b.t = config_.timestamp_rule == TimestampRule::kEquation ? std::min(last_pulse_timestamp_, u)
                                                             : std::min(prev_u, prev_ts);
    out.r = b.r;
    out.t = b.t;
    out.beacons.push_back(b);
    history_.push_back(out);
    events_.push_back({EventKind::kPulseEmitted, now,
                       "round=" + std::to_string(out.round) + " R_L=" + out.r.hex(), {}});

    last_pulse_block_ = now;
    last_pulse_timestamp_ = view.tip_timestamp();
    block_hash_.reset();
    stall_mark_ = now;
    return {Outcome::kAcceptedValid, out};
  }

  std::optional<LighthousePulse> get_latest(const ChainView& view) {
    touch(view);
    if (history_.empty()) return std::nullopt;
    return history_.back();
  }

  SubmitResult apply(const tx::Message& msg, const ChainView& view) {
    if (auto* reg = std::get_if<tx::Register>(&msg)) {
      register_producer(reg->caller, reg->producer, reg->v, reg->u, view);
    } else if (auto* dereg = std::get_if<tx::Deregister>(&msg)) {
      request_deregister(dereg->caller, dereg->producer, view);
    } else if (auto* sub = std::get_if<tx::Submit>(&msg)) {
      return submit(sub->sender, sub->v, sub->u, view);
    } else {
      get_latest(view);
    }
    return {};
  }

 private:
  ContractConfig config_;
  std::optional<ProducerRecord> producer_;
  BlockNumber last_pulse_block_ = 0;
  Seconds last_pulse_timestamp_ = 0;
  std::optional<Digest> block_hash_;
  BlockNumber stall_mark_ = 0;
  std::vector<LighthousePulse> history_;
  std::vector<ContractEvent> events_;
};

}  // namespace lighthouse
