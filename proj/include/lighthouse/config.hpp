#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adversary.hpp"
#include "contract.hpp"
#include "hash.hpp"
#include "ledger.hpp"

namespace lighthouse {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ContractKind { kMulti, kSingle };

struct ProducerConfig {
  std::string name;
  std::uint64_t chain_length = 0;  // 0: derived from the run length
  ProducerStrategy strategy = producer::Honest{};
  std::vector<SilenceWindow> silence;
};

struct CustomerConfig {
  std::string name;
  std::vector<BlockNumber> at_blocks;
  BlockNumber every_blocks = 0;
};

struct OutputPaths {
  std::string pulses = "pulses.jsonl";
  std::string events = "events.jsonl";
  std::string blocks = "blocks.jsonl";
  std::string summary = "summary.json";
  std::string checkpoints = "checkpoints";
};

struct ScenarioConfig {
  std::uint64_t master_seed = 0;
  BlockNumber blocks = 100;
  double block_interval = 15.0;
  Seconds genesis_time = 1'500'000'000;
  ContractKind kind = ContractKind::kMulti;
  ContractConfig contract;
  double miner_fraction = 0.0;
  std::uint64_t discard_cap = 10'000;
  MinerStrategy miner = miner::HonestMining{};
  std::vector<ProducerConfig> producers;
  std::vector<CustomerConfig> customers;
  bool deregister_on_stall = false;
  // Stop once this many lighthouse pulses exist (0: run all blocks).
  std::uint64_t max_pulses = 0;
  OutputPaths outputs;

  // Upper bound on messages a producer can send: its registration plus at
  // most one release every other block.
  std::uint64_t default_chain_length() const {
    return 2 + static_cast<std::uint64_t>(blocks + 1) / 2;
  }

  std::uint64_t chain_length(const ProducerConfig& p) const {
    return p.chain_length ? p.chain_length : default_chain_length();
  }

  void validate() const;
};

namespace detail {

class Obj {
 public:
  Obj(const nlohmann::json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const nlohmann::json& raw(const std::string& key) const { return j_.at(key); }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    auto x = v.get<std::int64_t>();
    if (x < min) throw ConfigError(at(key), "must be >= " + std::to_string(min));
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(at(key), "required");
    }
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

inline BitPredicate parse_predicate(const Obj& o) {
  BitPredicate p;
  p.bit = static_cast<unsigned>(o.integer("bit", 0, 0));
  if (p.bit > 255) throw ConfigError(o.at("bit"), "must be in [0, 255]");
  auto desired = o.integer("desired", 1, 0);
  if (desired > 1) throw ConfigError(o.at("desired"), "must be 0 or 1");
  p.desired = desired == 1;
  return p;
}

inline ProducerStrategy parse_producer_strategy(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError(path + ".type", "required string");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "honest") {
    Obj o(j, path, {"type", "interval_blocks"});
    return producer::Honest{o.integer("interval_blocks", 2, 1)};
  }
  if (type == "withholder") {
    Obj o(j, path, {"type", "interval_blocks", "bit", "desired", "withhold_blocks"});
    producer::Withholder w;
    w.interval_blocks = o.integer("interval_blocks", 2, 1);
    w.predicate = parse_predicate(o);
    if (o.has("withhold_blocks")) w.withhold_blocks = o.integer("withhold_blocks", 0, 1);
    return w;
  }
  if (type == "delayer") {
    Obj o(j, path, {"type", "interval_blocks", "delay_blocks"});
    return producer::Delayer{o.integer("interval_blocks", 2, 1), o.integer("delay_blocks", 1, 0)};
  }
  if (type == "clone") {
    Obj o(j, path, {"type", "interval_blocks", "group", "shared_seed"});
    producer::CloneCoalition c;
    c.group = o.string("group");
    c.shared_seed = o.unsigned_integer("shared_seed", 0);
    c.interval_blocks = o.integer("interval_blocks", 2, 1);
    return c;
  }
  throw ConfigError(path + ".type", "unknown producer strategy '" + type +
                                        "' (expected honest, withholder, delayer or clone)");
}

inline MinerStrategy parse_miner_strategy(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError(path + ".type", "required string");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "honest") {
    Obj o(j, path, {"type"});
    return miner::HonestMining{};
  }
  if (type == "bit_bias") {
    Obj o(j, path, {"type", "bit", "desired"});
    return miner::BitBias{parse_predicate(o)};
  }
  if (type == "producer_colluder") {
    Obj o(j, path, {"type", "bit", "desired", "producers"});
    miner::ProducerColluder c;
    c.predicate = parse_predicate(o);
    if (!o.has("producers") || !o.raw("producers").is_array()) {
      throw ConfigError(o.at("producers"), "required array of producer names");
    }
    for (const auto& n : o.raw("producers")) {
      if (!n.is_string()) throw ConfigError(o.at("producers"), "expected producer names");
      c.producers.push_back(n.get<std::string>());
    }
    if (c.producers.empty()) {
      throw ConfigError(o.at("producers"), "colluding miners need at least one producer's V");
    }
    return c;
  }
  throw ConfigError(path + ".type", "unknown miner strategy '" + type +
                                        "' (expected honest, bit_bias or producer_colluder)");
}

}  // namespace detail

inline void ScenarioConfig::validate() const {
  if (blocks < 1) throw ConfigError("blocks", "must be >= 1");
  if (!(miner_fraction >= 0.0 && miner_fraction <= 1.0)) {
    throw ConfigError("miner.fraction", "must be in [0, 1]");
  }
  if (producers.empty()) throw ConfigError("producers", "at least one producer is required");
  if (kind == ContractKind::kSingle && producers.size() != 1) {
    throw ConfigError("producers", "a single-producer contract takes exactly one producer");
  }
  std::set<std::string> names;
  std::map<std::string, std::size_t> groups;
  for (std::size_t i = 0; i < producers.size(); ++i) {
    const auto& p = producers[i];
    const std::string path = "producers[" + std::to_string(i) + "]";
    if (p.name.empty()) throw ConfigError(path + ".name", "must be non-empty");
    for (char ch : p.name) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-' && ch != '.') {
        throw ConfigError(path + ".name", "may only contain letters, digits, '_', '-' and '.'");
      }
    }
    if (p.name == contract.owner) throw ConfigError(path + ".name", "collides with the owner identity");
    if (!names.insert(p.name).second) throw ConfigError(path + ".name", "duplicate producer name");
    if (chain_length(p) < default_chain_length()) {
      throw ConfigError(path + ".chain_length",
                        "must be >= " + std::to_string(default_chain_length()) +
                            " to cover every message this run can emit");
    }
    if (auto* c = std::get_if<producer::CloneCoalition>(&p.strategy)) ++groups[c->group];
  }
  for (std::size_t i = 0; i < producers.size(); ++i) {
    if (auto* c = std::get_if<producer::CloneCoalition>(&producers[i].strategy); c && groups[c->group] < 2) {
      throw ConfigError("producers[" + std::to_string(i) + "].strategy.group",
                        "clone coalition '" + c->group + "' needs at least 2 members");
    }
  }
  if (auto* c = std::get_if<miner::ProducerColluder>(&miner)) {
    for (const auto& n : c->producers) {
      if (!names.count(n)) {
        throw ConfigError("miner.strategy.producers",
                          "colluding producer '" + n + "' is not configured; miners cannot know its V");
      }
    }
  }
  std::set<std::string> customer_names;
  for (std::size_t i = 0; i < customers.size(); ++i) {
    if (customers[i].name.empty() || !customer_names.insert(customers[i].name).second) {
      throw ConfigError("customers[" + std::to_string(i) + "].name", "must be unique and non-empty");
    }
  }
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::Obj;
  Obj root(j, "", {"master_seed", "blocks", "block_interval", "genesis_time", "contract", "miner",
                   "producers", "customers", "owner", "max_pulses", "outputs"});
  ScenarioConfig cfg;
  cfg.master_seed = root.unsigned_integer("master_seed", 0);
  cfg.blocks = root.integer("blocks", 100, 1);
  cfg.block_interval = root.number("block_interval", 15.0);
  if (cfg.block_interval < 0) throw ConfigError("block_interval", "must be >= 0");
  cfg.genesis_time = root.integer("genesis_time", cfg.genesis_time, 0);
  cfg.max_pulses = root.unsigned_integer("max_pulses", 0);

  if (root.has("contract")) {
    Obj c(root.raw("contract"), "contract",
          {"kind", "owner", "deregister_delay", "hash", "timestamp_rule", "stall_blocks"});
    auto kind = c.string("kind", "multi");
    if (kind == "multi") {
      cfg.kind = ContractKind::kMulti;
    } else if (kind == "single") {
      cfg.kind = ContractKind::kSingle;
    } else {
      throw ConfigError("contract.kind", "expected multi or single");
    }
    cfg.contract.owner = c.string("owner", "owner");
    if (cfg.contract.owner.empty()) throw ConfigError("contract.owner", "must be non-empty");
    cfg.contract.deregister_delay = c.integer("deregister_delay", 10, 0);
    cfg.contract.stall_blocks = c.integer("stall_blocks", 64, 0);
    try {
      cfg.contract.hasher = Hasher(parse_hash_variant(c.string("hash", "sha3-256")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("contract.hash", e.what());
    }
    try {
      cfg.contract.timestamp_rule = parse_timestamp_rule(c.string("timestamp_rule", "eq2"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("contract.timestamp_rule", e.what());
    }
  }

  if (root.has("miner")) {
    Obj m(root.raw("miner"), "miner", {"fraction", "strategy", "discard_cap"});
    cfg.miner_fraction = m.number("fraction", 0.0);
    cfg.discard_cap = m.unsigned_integer("discard_cap", 10'000);
    if (cfg.discard_cap == 0) throw ConfigError("miner.discard_cap", "must be positive");
    if (m.has("strategy")) cfg.miner = detail::parse_miner_strategy(m.raw("strategy"), "miner.strategy");
  }

  if (!root.has("producers") || !root.raw("producers").is_array()) {
    throw ConfigError("producers", "required array");
  }
  const auto& plist = root.raw("producers");
  for (std::size_t i = 0; i < plist.size(); ++i) {
    const std::string path = "producers[" + std::to_string(i) + "]";
    Obj p(plist[i], path, {"name", "chain_length", "strategy", "silent"});
    ProducerConfig pc;
    pc.name = p.string("name");
    pc.chain_length = p.unsigned_integer("chain_length", 0);
    if (p.has("chain_length") && pc.chain_length == 0) {
      throw ConfigError(path + ".chain_length", "must be >= 1");
    }
    if (p.has("strategy")) pc.strategy = detail::parse_producer_strategy(p.raw("strategy"), path + ".strategy");
    if (p.has("silent")) {
      const auto& windows = p.raw("silent");
      if (!windows.is_array()) throw ConfigError(path + ".silent", "expected [[from, to], ...]");
      for (const auto& w : windows) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_number_integer() ||
            w[0].get<BlockNumber>() > w[1].get<BlockNumber>()) {
          throw ConfigError(path + ".silent", "each window must be [from, to] with from <= to");
        }
        pc.silence.push_back({w[0].get<BlockNumber>(), w[1].get<BlockNumber>()});
      }
    }
    cfg.producers.push_back(std::move(pc));
  }
  // Clone member counts follow from the roster.
  for (auto& p : cfg.producers) {
    if (auto* c = std::get_if<producer::CloneCoalition>(&p.strategy)) {
      c->member_count = 0;
      for (const auto& q : cfg.producers) {
        if (auto* d = std::get_if<producer::CloneCoalition>(&q.strategy); d && d->group == c->group) {
          ++c->member_count;
        }
      }
    }
  }

  if (root.has("customers")) {
    const auto& clist = root.raw("customers");
    if (!clist.is_array()) throw ConfigError("customers", "expected an array");
    for (std::size_t i = 0; i < clist.size(); ++i) {
      const std::string path = "customers[" + std::to_string(i) + "]";
      Obj c(clist[i], path, {"name", "at_blocks", "every_blocks"});
      CustomerConfig cc;
      cc.name = c.string("name");
      cc.every_blocks = c.integer("every_blocks", 0, 0);
      if (c.has("at_blocks")) {
        const auto& at = c.raw("at_blocks");
        if (!at.is_array()) throw ConfigError(path + ".at_blocks", "expected an array of block numbers");
        for (const auto& b : at) {
          if (!b.is_number_integer()) throw ConfigError(path + ".at_blocks", "expected integers");
          cc.at_blocks.push_back(b.get<BlockNumber>());
        }
      }
      cfg.customers.push_back(std::move(cc));
    }
  }

  if (root.has("owner")) {
    Obj o(root.raw("owner"), "owner", {"deregister_on_stall"});
    cfg.deregister_on_stall = o.boolean("deregister_on_stall", false);
  }

  if (root.has("outputs")) {
    Obj o(root.raw("outputs"), "outputs", {"pulses", "events", "blocks", "summary", "checkpoints"});
    cfg.outputs.pulses = o.string("pulses", cfg.outputs.pulses);
    cfg.outputs.events = o.string("events", cfg.outputs.events);
    cfg.outputs.blocks = o.string("blocks", cfg.outputs.blocks);
    cfg.outputs.summary = o.string("summary", cfg.outputs.summary);
    cfg.outputs.checkpoints = o.string("checkpoints", cfg.outputs.checkpoints);
  }

  cfg.validate();
  return cfg;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

}  // namespace lighthouse
