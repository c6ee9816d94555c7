#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lighthouse/lighthouse.hpp"

namespace lighthouse::testing {

// Honest producers on a chain with a biased coalition, optional silences and
// customers. Everything a verifier must accept.
inline ScenarioConfig random_honest_scenario(std::uint64_t seed, std::size_t max_producers = 3) {
  Rng rng(derive_seed(seed, "fixture"));
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng.next_u64() % (hi - lo + 1); };

  ScenarioConfig cfg;
  cfg.master_seed = seed;
  cfg.blocks = static_cast<BlockNumber>(pick(150, 500));
  cfg.miner_fraction = rng.uniform01() * 0.4;
  if (rng.bernoulli(0.5)) cfg.miner = miner::BitBias{{static_cast<unsigned>(pick(0, 255)), rng.bernoulli(0.5)}};
  const std::size_t m = static_cast<std::size_t>(pick(1, max_producers));
  for (std::size_t i = 0; i < m; ++i) {
    ProducerConfig p;
    p.name = "p" + std::to_string(i);
    const BlockNumber interval = static_cast<BlockNumber>(pick(1, 5));
    if (rng.bernoulli(0.2)) {
      p.strategy = producer::Delayer{interval, static_cast<BlockNumber>(pick(1, 4))};
    } else {
      p.strategy = producer::Honest{interval};
    }
    if (rng.bernoulli(0.2)) {
      const auto from = static_cast<BlockNumber>(pick(10, 100));
      p.silence.push_back({from, from + static_cast<BlockNumber>(pick(5, 300))});
    }
    cfg.producers.push_back(std::move(p));
  }
  if (rng.bernoulli(0.3)) cfg.customers.push_back({"reader", {}, static_cast<BlockNumber>(pick(3, 20))});
  return cfg;
}

inline std::vector<nlohmann::ordered_json> split_lines(const std::string& text) {
  std::vector<nlohmann::ordered_json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::ordered_json::parse(line));
  }
  return out;
}

inline std::string join_lines(const std::vector<nlohmann::ordered_json>& lines) {
  std::string out;
  for (const auto& j : lines) out += j.dump() + "\n";
  return out;
}

inline std::string flip_hex_bit(const std::string& hex, Rng& rng) {
  Digest d = Digest::from_hex(hex);
  const auto bit = rng.next_u64() % 256;
  d.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  return d.hex();
}

// Changes exactly one field of one pulse record. `what` names the mutation.
inline std::string mutate_pulse_log(const std::string& log, Rng& rng, std::string* what = nullptr) {
  auto lines = split_lines(log);
  if (lines.empty()) return log;
  auto& p = lines[rng.next_u64() % lines.size()];
  auto& beacons = p["beacons"];
  auto& b = beacons[rng.next_u64() % beacons.size()];
  const int kind = static_cast<int>(rng.next_u64() % 10);
  auto bump = [&](nlohmann::ordered_json& field) {
    const std::int64_t delta = rng.bernoulli(0.5) ? 1 : -1;
    field = field.get<std::int64_t>() + delta;
  };
  std::string name;
  switch (kind) {
    case 0: p["R_L"] = flip_hex_bit(p["R_L"], rng); name = "R_L bit"; break;
    case 1: bump(p["T_L"]); name = "T_L"; break;
    case 2: bump(p["block"]); name = "block"; break;
    case 3: p["round"] = p["round"].get<std::uint64_t>() + 1; name = "round"; break;
    case 4: b["V"] = flip_hex_bit(b["V"], rng); name = "V bit"; break;
    case 5: b["R"] = flip_hex_bit(b["R"], rng); name = "R bit"; break;
    case 6: bump(b["T"]); name = "T"; break;
    case 7: bump(b["block_used"]); name = "block_used"; break;
    case 8: b["index"] = b["index"].get<std::uint64_t>() + 1; name = "index"; break;
    default: b["producer"] = b["producer"].get<std::string>() + "x"; name = "producer"; break;
  }
  if (what) *what = name;
  return join_lines(lines);
}

}  // namespace lighthouse::testing
