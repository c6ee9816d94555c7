#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "digest.hpp"

namespace lighthouse {

// Contract calls as they appear inside a block. Payloads are opaque to the
// ledger; only the contract and the log verifier decode them.
namespace tx {

struct Register {
  std::string caller;
  std::string producer;
  Digest v;
  std::int64_t u = 0;
};

struct Deregister {
  std::string caller;
  std::string producer;
};

struct Submit {
  std::string sender;
  Digest v;
  std::int64_t u = 0;
};

// Customer retrieval of the latest pulse. Counts as contract activity.
struct Retrieve {
  std::string caller;
};

using Message = std::variant<Register, Deregister, Submit, Retrieve>;

enum class Kind : std::uint8_t { kRegister = 1, kDeregister = 2, kSubmit = 3, kRetrieve = 4 };

inline Bytes encode(const Message& m) {
  Bytes out;
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Register>) {
          out.push_back(static_cast<std::uint8_t>(Kind::kRegister));
          append_str(out, msg.caller);
          append_str(out, msg.producer);
          append(out, msg.v);
          append_i64(out, msg.u);
        } else if constexpr (std::is_same_v<T, Deregister>) {
          out.push_back(static_cast<std::uint8_t>(Kind::kDeregister));
          append_str(out, msg.caller);
          append_str(out, msg.producer);
        } else if constexpr (std::is_same_v<T, Submit>) {
          out.push_back(static_cast<std::uint8_t>(Kind::kSubmit));
          append_str(out, msg.sender);
          append(out, msg.v);
          append_i64(out, msg.u);
        } else {
          out.push_back(static_cast<std::uint8_t>(Kind::kRetrieve));
          append_str(out, msg.caller);
        }
      },
      m);
  return out;
}

namespace detail {

class Reader {
 public:
  explicit Reader(const Bytes& data) : data_(data) {}

  std::uint8_t byte() {
    need(1);
    return data_[pos_++];
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::string str() {
    auto n = u64();
    need(n);
    std::string s(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  Digest digest() {
    need(Digest::kSize);
    Digest d;
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), Digest::kSize, d.bytes.begin());
    pos_ += Digest::kSize;
    return d;
  }
  void finish() const {
    if (pos_ != data_.size()) throw std::invalid_argument("trailing bytes in transaction payload");
  }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw std::invalid_argument("truncated transaction payload");
  }

  const Bytes& data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Message decode(const Bytes& payload) {
  detail::Reader r(payload);
  Message m;
  switch (static_cast<Kind>(r.byte())) {
    case Kind::kRegister: {
      Register msg;
      msg.caller = r.str();
      msg.producer = r.str();
      msg.v = r.digest();
      msg.u = static_cast<std::int64_t>(r.u64());
      m = msg;
      break;
    }
    case Kind::kDeregister: {
      Deregister msg;
      msg.caller = r.str();
      msg.producer = r.str();
      m = msg;
      break;
    }
    case Kind::kSubmit: {
      Submit msg;
      msg.sender = r.str();
      msg.v = r.digest();
      msg.u = static_cast<std::int64_t>(r.u64());
      m = msg;
      break;
    }
    case Kind::kRetrieve: {
      Retrieve msg;
      msg.caller = r.str();
      m = msg;
      break;
    }
    default:
      throw std::invalid_argument("unknown transaction kind");
  }
  r.finish();
  return m;
}

}  // namespace tx
}  // namespace lighthouse
