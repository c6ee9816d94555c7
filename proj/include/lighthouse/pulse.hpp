#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "digest.hpp"
#include "ledger.hpp"

namespace lighthouse {

struct BeaconPulse {
  std::string producer;
  std::uint64_t index = 0;  // Merlin index of V
  Digest v;
  Digest r;
  Seconds t = 0;
  BlockNumber block_used = 0;  // block whose hash was mixed into r

  friend bool operator==(const BeaconPulse&, const BeaconPulse&) = default;
};

struct LighthousePulse {
  std::uint64_t round = 0;
  Digest r;
  Seconds t = 0;
  BlockNumber block = 0;  // block in which the pulse was emitted
  std::vector<BeaconPulse> beacons;

  friend bool operator==(const LighthousePulse&, const LighthousePulse&) = default;
};

inline nlohmann::ordered_json to_json(const BeaconPulse& b) {
  return {{"producer", b.producer}, {"index", b.index}, {"V", b.v.hex()},
          {"R", b.r.hex()},         {"T", b.t},         {"block_used", b.block_used}};
}

inline nlohmann::ordered_json to_json(const LighthousePulse& p) {
  nlohmann::ordered_json beacons = nlohmann::ordered_json::array();
  for (const auto& b : p.beacons) beacons.push_back(to_json(b));
  return {{"round", p.round}, {"R_L", p.r.hex()}, {"T_L", p.t}, {"block", p.block},
          {"beacons", std::move(beacons)}};
}

inline BeaconPulse beacon_from_json(const nlohmann::json& j) {
  BeaconPulse b;
  b.producer = j.at("producer").get<std::string>();
  b.index = j.at("index").get<std::uint64_t>();
  b.v = Digest::from_hex(j.at("V").get<std::string>());
  b.r = Digest::from_hex(j.at("R").get<std::string>());
  b.t = j.at("T").get<Seconds>();
  b.block_used = j.at("block_used").get<BlockNumber>();
  return b;
}

inline LighthousePulse pulse_from_json(const nlohmann::json& j) {
  LighthousePulse p;
  p.round = j.at("round").get<std::uint64_t>();
  p.r = Digest::from_hex(j.at("R_L").get<std::string>());
  p.t = j.at("T_L").get<Seconds>();
  p.block = j.at("block").get<BlockNumber>();
  for (const auto& b : j.at("beacons")) p.beacons.push_back(beacon_from_json(b));
  return p;
}

// One compact JSON object per line, keys in a fixed order.
inline std::string pulse_line(const LighthousePulse& p) { return to_json(p).dump(); }

}  // namespace lighthouse
