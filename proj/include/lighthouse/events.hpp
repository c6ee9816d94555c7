#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledger.hpp"

namespace lighthouse {

enum class EventKind {
  kPulseEmitted,
  kMessageInvalid,
  kMessageRejected,
  kHashExpired,
  kZeroCombinedRefused,
  kProducerRegistered,
  kProducerDeregistered,
  kRoundStalled,
};

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kPulseEmitted: return "PulseEmitted";
    case EventKind::kMessageInvalid: return "MessageInvalid";
    case EventKind::kMessageRejected: return "MessageRejected";
    case EventKind::kHashExpired: return "HashExpired";
    case EventKind::kZeroCombinedRefused: return "ZeroCombinedRefused";
    case EventKind::kProducerRegistered: return "ProducerRegistered";
    case EventKind::kProducerDeregistered: return "ProducerDeregistered";
    case EventKind::kRoundStalled: return "RoundStalled";
  }
  return "Unknown";
}

inline EventKind parse_event_kind(std::string_view name) {
  for (auto k : {EventKind::kPulseEmitted, EventKind::kMessageInvalid, EventKind::kMessageRejected,
                 EventKind::kHashExpired, EventKind::kZeroCombinedRefused,
                 EventKind::kProducerRegistered, EventKind::kProducerDeregistered,
                 EventKind::kRoundStalled}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown event kind '" + std::string(name) + "'");
}

// `subjects` names the producers the event is about (the sender of a bad
// message, the producers a stalled round is waiting on). It is rendered into
// `detail` for the JSON log.
struct ContractEvent {
  EventKind kind;
  BlockNumber block = 0;
  std::string detail;
  std::vector<std::string> subjects;
};

inline nlohmann::ordered_json to_json(const ContractEvent& e) {
  return {{"block", e.block}, {"event", std::string(to_string(e.kind))}, {"detail", e.detail}};
}

inline ContractEvent event_from_json(const nlohmann::json& j) {
  return {parse_event_kind(j.at("event").get<std::string>()), j.at("block").get<BlockNumber>(),
          j.at("detail").get<std::string>(), {}};
}

inline std::string join(const std::vector<std::string>& names, char sep = ',') {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out.push_back(sep);
    out += n;
  }
  return out;
}

enum class TimestampRule {
  kEquation,  // T_x = min(timestamp(B(R_y)), U_x)
  kProse,     // T_x = min(U_{x-1}, timestamp(block where V_{x-1} was accepted))
};

inline TimestampRule parse_timestamp_rule(std::string_view name) {
  if (name == "eq2") return TimestampRule::kEquation;
  if (name == "prose") return TimestampRule::kProse;
  throw std::invalid_argument("unknown timestamp rule '" + std::string(name) +
                              "' (expected eq2 or prose)");
}

inline std::string_view to_string(TimestampRule r) {
  return r == TimestampRule::kEquation ? "eq2" : "prose";
}

}  // namespace lighthouse
