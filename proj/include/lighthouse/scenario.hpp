#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adversary.hpp"
#include "config.hpp"
#include "contract.hpp"
#include "ledger.hpp"
#include "merlin.hpp"
#include "rng.hpp"
#include "single_contract.hpp"
#include "tx.hpp"

namespace lighthouse {

struct ScenarioSummary {
  std::uint64_t blocks = 0;
  std::uint64_t pulses = 0;
  std::uint64_t invalid_messages = 0;
  std::uint64_t rejected_messages = 0;
  std::uint64_t stalls = 0;
  std::uint64_t zero_refusals = 0;
  std::uint64_t hash_expired = 0;
  std::uint64_t deregistrations = 0;
  std::uint64_t discarded_blocks = 0;
  std::uint64_t coalition_blocks = 0;
  std::map<std::string, std::uint64_t> withheld_rounds;
  bool livelock = false;
  std::string livelock_detail;
};

inline nlohmann::ordered_json to_json(const ScenarioSummary& s) {
  nlohmann::ordered_json withheld = nlohmann::ordered_json::object();
  for (const auto& [name, n] : s.withheld_rounds) withheld[name] = n;
  nlohmann::ordered_json j = {{"blocks", s.blocks},
                      {"pulses", s.pulses},
                      {"invalid_messages", s.invalid_messages},
                      {"rejected_messages", s.rejected_messages},
                      {"stalls", s.stalls},
                      {"zero_refusals", s.zero_refusals},
                      {"hash_expired", s.hash_expired},
                      {"deregistrations", s.deregistrations},
                      {"discarded_blocks", s.discarded_blocks},
                      {"coalition_blocks", s.coalition_blocks},
                      {"withheld_rounds", withheld},
                      {"livelock", s.livelock}};
  if (s.livelock) j["livelock_detail"] = s.livelock_detail;
  return j;
}

struct ScenarioResult {
  std::vector<LighthousePulse> pulses;
  std::vector<ContractEvent> events;
  std::vector<Block> blocks;
  std::map<std::string, ChainCheckpoint> checkpoints;
  ScenarioSummary summary;

  std::string pulse_log() const {
    std::string out;
    for (const auto& p : pulses) out += pulse_line(p) + "\n";
    return out;
  }
  std::string event_log() const {
    std::string out;
    for (const auto& e : events) out += to_json(e).dump() + "\n";
    return out;
  }
  std::string block_log() const {
    std::string out;
    for (const auto& b : blocks) out += block_summary(b).dump() + "\n";
    return out;
  }
};

namespace detail {

struct Agent {
  const ProducerConfig* config;
  MerlinChain chain;
  ProducerMemory memory;
};

inline Digest producer_seed(const ScenarioConfig& cfg, const ProducerConfig& p) {
  const auto& h = cfg.contract.hasher;
  if (auto* c = std::get_if<producer::CloneCoalition>(&p.strategy)) {
    return seed_digest(c->shared_seed, "clone:" + c->group, h);
  }
  return seed_digest(cfg.master_seed, "producer:" + p.name, h);
}

inline bool customer_due(const CustomerConfig& c, BlockNumber b) {
  if (c.every_blocks > 0 && b % c.every_blocks == 0) return true;
  for (auto at : c.at_blocks) {
    if (at == b) return true;
  }
  return false;
}

}  // namespace detail

// Drives one contract against one simulated chain. Block 0 is genesis and the
// deployment block; registrations land in block 1. Each later block carries
// the owner's calls, customer retrievals, then producer messages decided from
// the public state after the previous block.
template <typename Contract>
ScenarioResult run_scenario_with(const ScenarioConfig& cfg) {
  cfg.validate();
  const Hasher hasher = cfg.contract.hasher;

  MinerPool pool;
  pool.coalition_fraction = cfg.miner_fraction;
  pool.block_interval = cfg.block_interval;
  pool.rng_seed = derive_seed(cfg.master_seed, "ledger");
  pool.discard_cap = cfg.discard_cap;
  pool.genesis_time = cfg.genesis_time;
  Ledger ledger(pool, hasher);

  Contract contract(cfg.contract, ledger.view());

  std::vector<detail::Agent> agents;
  agents.reserve(cfg.producers.size());
  for (const auto& p : cfg.producers) {
    agents.push_back({&p, MerlinChain(detail::producer_seed(cfg, p), cfg.chain_length(p), hasher), {}});
  }
  std::map<std::string, detail::Agent*> by_name;
  for (auto& a : agents) by_name[a.config->name] = &a;

  std::vector<const detail::Agent*> colluders;
  if (auto* c = std::get_if<miner::ProducerColluder>(&cfg.miner)) {
    for (const auto& n : c->producers) colluders.push_back(by_name.at(n));
  }

  ScenarioResult result;
  std::vector<tx::Message> pending;
  std::vector<detail::Agent*> pending_senders;  // parallel to `pending`, null for non-producers
  for (auto& a : agents) {
    auto first = a.chain.next();
    pending.push_back(tx::Register{cfg.contract.owner, a.config->name, first.value, ledger.tip().timestamp});
    pending_senders.push_back(nullptr);
  }

  std::set<std::string> deregistration_requested;
  std::size_t events_seen = 0;

  for (BlockNumber b = 1; b <= cfg.blocks; ++b) {
    std::vector<Bytes> payloads;
    payloads.reserve(pending.size());
    for (const auto& m : pending) payloads.push_back(tx::encode(m));

    MinerKnowledge knowledge;
    knowledge.is_round_block = b == contract.target_block() && !contract.cached_target_hash();
    for (const auto* a : colluders) {
      if (!a->chain.exhausted()) knowledge.next_values.push_back(a->chain.peek());
    }
    auto policy = [&](const Block& candidate) {
      return miner_decide(cfg.miner, candidate, knowledge, hasher) == Decision::kPublish;
    };

    try {
      ledger.advance(std::move(payloads), policy);
    } catch (const Livelock& e) {
      result.summary.livelock = true;
      result.summary.livelock_detail = e.what();
      break;
    }
    const ChainView& view = ledger.view();

    for (std::size_t i = 0; i < pending.size(); ++i) {
      auto r = contract.apply(pending[i], view);
      if (auto* a = pending_senders[i]) {
        a->memory.last_invalid = r.outcome != Outcome::kAcceptedValid;
      }
    }
    pending.clear();
    pending_senders.clear();

    // Owner's scripted response: deregister whoever a stall report names.
    const auto& events = contract.events();
    for (; events_seen < events.size(); ++events_seen) {
      const auto& e = events[events_seen];
      if (e.kind != EventKind::kRoundStalled || !cfg.deregister_on_stall) continue;
      for (const auto& name : e.subjects) {
        if (deregistration_requested.insert(name).second) {
          pending.push_back(tx::Deregister{cfg.contract.owner, name});
          pending_senders.push_back(nullptr);
        }
      }
    }

    if (cfg.max_pulses && contract.history().size() >= cfg.max_pulses) break;
    if (b == cfg.blocks) break;

    for (const auto& c : cfg.customers) {
      if (detail::customer_due(c, b + 1)) {
        pending.push_back(tx::Retrieve{c.name});
        pending_senders.push_back(nullptr);
      }
    }

    PublicView pv;
    pv.next_block = b + 1;
    pv.clock = view.tip_timestamp();
    pv.anchor = contract.anchor_block();
    pv.target_hash = contract.cached_target_hash();
    if (!pv.target_hash) pv.target_hash = view.block_hash(contract.target_block());
    for (auto& a : agents) {
      const auto* rec = contract.producer(a.config->name);
      if (!rec) continue;
      pv.pulsed_this_round = rec->pulsed_this_round;
      if (auto msg = producer_act(a.config->strategy, pv, a.chain, a.memory, a.config->silence)) {
        pending.push_back(tx::Submit{a.config->name, msg->v, msg->u});
        pending_senders.push_back(&a);
      }
    }
  }

  result.pulses = contract.history();
  result.events = contract.events();
  result.blocks = ledger.blocks();
  for (const auto& a : agents) {
    result.checkpoints.emplace(a.config->name, a.chain.checkpoint());
    if (std::holds_alternative<producer::Withholder>(a.config->strategy)) {
      result.summary.withheld_rounds[a.config->name] = a.memory.withheld_rounds;
    }
  }

  auto& s = result.summary;
  s.blocks = static_cast<std::uint64_t>(ledger.height());
  s.pulses = result.pulses.size();
  s.discarded_blocks = ledger.total_discards();
  s.coalition_blocks = ledger.coalition_blocks();
  for (const auto& e : result.events) {
    switch (e.kind) {
      case EventKind::kMessageInvalid: ++s.invalid_messages; break;
      case EventKind::kMessageRejected: ++s.rejected_messages; break;
      case EventKind::kRoundStalled: ++s.stalls; break;
      case EventKind::kZeroCombinedRefused: ++s.zero_refusals; break;
      case EventKind::kHashExpired: ++s.hash_expired; break;
      case EventKind::kProducerDeregistered: ++s.deregistrations; break;
      default: break;
    }
  }
  return result;
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  return cfg.kind == ContractKind::kSingle ? run_scenario_with<SingleProducerContract>(cfg)
                                           : run_scenario_with<LighthouseContract>(cfg);
}

// Writes every output file under `dir`; relative paths in cfg.outputs are
// resolved against it.
inline void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& r,
                          const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : dir / path;
  };
  auto write = [&](const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  write(resolve(cfg.outputs.pulses), r.pulse_log());
  write(resolve(cfg.outputs.events), r.event_log());
  write(resolve(cfg.outputs.blocks), r.block_log());
  write(resolve(cfg.outputs.summary), to_json(r.summary).dump(2) + "\n");
  const auto cp_dir = resolve(cfg.outputs.checkpoints);
  for (const auto& [name, cp] : r.checkpoints) {
    write(cp_dir / (name + ".json"), to_json(cp).dump(2) + "\n");
  }
}

}  // namespace lighthouse
