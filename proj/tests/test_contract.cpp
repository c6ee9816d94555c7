#include <cstdint>
#include <string>

#include <gtest/gtest.h>

#include "lighthouse/contract.hpp"
#include "lighthouse/keccak.hpp"
#include "lighthouse/merlin.hpp"
#include "lighthouse/rng.hpp"
#include "lighthouse/single_contract.hpp"

using namespace lighthouse;

namespace {

MinerPool quiet_pool(std::uint64_t seed) {
  MinerPool p;
  p.coalition_fraction = 0.0;
  p.rng_seed = seed;
  return p;
}

Digest seed_of(std::uint8_t b) {
  Digest d;
  d.bytes.fill(b);
  return d;
}

std::size_t count(const std::vector<ContractEvent>& events, EventKind kind) {
  std::size_t n = 0;
  for (const auto& e : events) n += e.kind == kind;
  return n;
}

// Deploys at genesis; tests advance the ledger and call the contract with the
// resulting view, as if the call were included in the tip block.
template <class Contract>
struct Harness {
  Ledger ledger;
  Contract c;
  explicit Harness(std::uint64_t seed = 1, ContractConfig cfg = {})
      : ledger(quiet_pool(seed)), c(cfg, ledger.view()) {}
  const ChainView& view() const { return ledger.view(); }
  void to_block(BlockNumber b) {
    while (ledger.tip().number < b) ledger.advance();
  }
  BlockNumber now() const { return ledger.tip().number; }
};

using Multi = Harness<LighthouseContract>;

// Independent oracle for a beacon value: SHA3-256 over V || blockhash.
Digest oracle_r(const Digest& v, const Digest& block_hash) {
  Bytes buf(v.bytes.begin(), v.bytes.end());
  buf.insert(buf.end(), block_hash.bytes.begin(), block_hash.bytes.end());
  return keccak::sha3_256(buf);
}

}  // namespace

TEST(Registration, OwnerOnlyAndNoDuplicates) {
  Multi h;
  h.to_block(1);
  MerlinChain chain(seed_of(1), 10);
  EXPECT_FALSE(h.c.register_producer("mallory", "alpha", chain.value(1), 0, h.view()));
  EXPECT_EQ(h.c.producer("alpha"), nullptr);
  EXPECT_TRUE(h.c.register_producer("owner", "alpha", chain.value(1), 0, h.view()));
  EXPECT_FALSE(h.c.register_producer("owner", "alpha", chain.value(2), 0, h.view()));
  EXPECT_FALSE(h.c.register_producer("owner", "", chain.value(2), 0, h.view()));
  EXPECT_EQ(h.c.producers().size(), 1u);
  EXPECT_EQ(h.c.producer("alpha")->last_v, chain.value(1));
  EXPECT_TRUE(h.c.history().empty());
  EXPECT_EQ(count(h.c.events(), EventKind::kMessageRejected), 3u);
  EXPECT_EQ(count(h.c.events(), EventKind::kProducerRegistered), 1u);
}

TEST(Deregistration, TakesEffectAfterDelay) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(1), 200), b(seed_of(2), 200);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(100);
  EXPECT_FALSE(h.c.request_deregister("beta", "beta", h.view()));
  EXPECT_TRUE(h.c.request_deregister("owner", "beta", h.view()));
  EXPECT_EQ(h.c.producer("beta")->deregister_at, 110);

  h.to_block(105);
  EXPECT_EQ(h.c.submit("beta", b.next().value, h.ledger.tip().timestamp, h.view()).outcome,
            Outcome::kAcceptedValid);
  h.to_block(109);
  h.c.touch(h.view());
  EXPECT_NE(h.c.producer("beta"), nullptr);
  h.to_block(110);
  h.c.touch(h.view());
  EXPECT_EQ(h.c.producer("beta"), nullptr);
  EXPECT_EQ(count(h.c.events(), EventKind::kProducerDeregistered), 1u);
  EXPECT_EQ(h.c.submit("beta", b.next().value, 0, h.view()).outcome, Outcome::kRejected);
}

TEST(Deregistration, RemainingSetCombinesOnRemoval) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(1), 50), b(seed_of(2), 50);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(2);
  auto res = h.c.submit("alpha", a.next().value, h.ledger.tip().timestamp, h.view());
  EXPECT_EQ(res.outcome, Outcome::kAcceptedValid);
  EXPECT_FALSE(res.pulse);
  h.c.request_deregister("owner", "beta", h.view());
  h.to_block(12);
  h.c.touch(h.view());
  ASSERT_EQ(h.c.history().size(), 1u);
  EXPECT_EQ(h.c.history()[0].block, 12);
  ASSERT_EQ(h.c.history()[0].beacons.size(), 1u);
  EXPECT_EQ(h.c.history()[0].beacons[0].producer, "alpha");
}

TEST(Touch, CachesTargetHashAndIsIdempotent) {
  Multi h;
  EXPECT_EQ(h.c.target_block(), 1);
  h.c.touch(h.view());
  EXPECT_FALSE(h.c.cached_target_hash());
  h.to_block(1);
  h.c.touch(h.view());
  ASSERT_TRUE(h.c.cached_target_hash());
  EXPECT_EQ(*h.c.cached_target_hash(), h.ledger.blocks()[1].hash);
  const auto events = h.c.events().size();
  h.to_block(40);
  h.c.touch(h.view());
  h.c.touch(h.view());
  EXPECT_EQ(*h.c.cached_target_hash(), h.ledger.blocks()[1].hash);
  EXPECT_EQ(h.c.events().size(), events);
}

TEST(Touch, ExpiredHashResetsToNextBlock) {
  Multi h;
  h.to_block(300);
  h.c.touch(h.view());
  EXPECT_EQ(count(h.c.events(), EventKind::kHashExpired), 1u);
  EXPECT_EQ(h.c.anchor_block(), 300);
  EXPECT_EQ(h.c.target_block(), 301);
  h.c.touch(h.view());
  EXPECT_EQ(count(h.c.events(), EventKind::kHashExpired), 1u);
  h.to_block(301);
  h.c.touch(h.view());
  ASSERT_TRUE(h.c.cached_target_hash());
  EXPECT_EQ(*h.c.cached_target_hash(), h.ledger.blocks()[301].hash);
}

TEST(Touch, LastResolvableBlockIsStillCached) {
  Multi h;
  h.to_block(256);  // window [1, 256]
  h.c.touch(h.view());
  EXPECT_EQ(count(h.c.events(), EventKind::kHashExpired), 0u);
  EXPECT_EQ(*h.c.cached_target_hash(), h.ledger.blocks()[1].hash);
}

TEST(Submit, UnregisteredAndBrokenLinkLeaveStateUntouched) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(3), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.to_block(2);
  EXPECT_EQ(h.c.submit("beta", a.value(2), 0, h.view()).outcome, Outcome::kRejected);
  const ProducerRecord before = *h.c.producer("alpha");
  EXPECT_EQ(h.c.submit("alpha", a.value(3), 0, h.view()).outcome, Outcome::kRejected);
  EXPECT_EQ(h.c.submit("alpha", seed_of(9), 0, h.view()).outcome, Outcome::kRejected);
  const ProducerRecord& after = *h.c.producer("alpha");
  EXPECT_EQ(after.last_v, before.last_v);
  EXPECT_EQ(after.last_index, before.last_index);
  EXPECT_EQ(after.last_v_block, before.last_v_block);
  EXPECT_TRUE(h.c.history().empty());
}

TEST(Submit, TooEarlyIsAcceptedInvalidAndAdvancesChain) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(4), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  EXPECT_EQ(h.c.submit("alpha", a.next().value, 0, h.view()).outcome, Outcome::kAcceptedInvalid);
  EXPECT_EQ(h.c.producer("alpha")->last_v, a.value(2));
  EXPECT_EQ(h.c.producer("alpha")->last_index, 2u);
  EXPECT_EQ(count(h.c.events(), EventKind::kMessageInvalid), 1u);
  // the old value no longer links
  h.to_block(2);
  EXPECT_EQ(h.c.submit("alpha", a.value(2), 0, h.view()).outcome, Outcome::kRejected);
  EXPECT_EQ(h.c.submit("alpha", a.next().value, 0, h.view()).outcome, Outcome::kAcceptedValid);
}

TEST(Submit, ValidPulseMatchesIndependentRecomputation) {
  Multi h(7);
  h.to_block(1);
  MerlinChain a(seed_of(5), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.to_block(2);
  const Seconds u = h.ledger.tip().timestamp;
  auto res = h.c.submit("alpha", a.next().value, u, h.view());
  ASSERT_EQ(res.outcome, Outcome::kAcceptedValid);
  ASSERT_TRUE(res.pulse);
  const auto& p = *res.pulse;
  EXPECT_EQ(p.round, 0u);
  EXPECT_EQ(p.block, 2);
  ASSERT_EQ(p.beacons.size(), 1u);
  EXPECT_EQ(p.beacons[0].index, 2u);
  EXPECT_EQ(p.beacons[0].block_used, 1);
  EXPECT_EQ(p.beacons[0].r, oracle_r(a.value(2), h.ledger.blocks()[1].hash));
  EXPECT_EQ(p.r, p.beacons[0].r);
  EXPECT_EQ(p.t, std::min(h.ledger.blocks()[0].timestamp, u));
  EXPECT_EQ(h.c.anchor_block(), 2);
  EXPECT_EQ(h.c.target_block(), 3);
}

TEST(Submit, SecondMessageInRoundIsInvalid) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(6), 10), b(seed_of(7), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(2);
  EXPECT_EQ(h.c.submit("alpha", a.next().value, 0, h.view()).outcome, Outcome::kAcceptedValid);
  EXPECT_EQ(h.c.submit("alpha", a.next().value, 0, h.view()).outcome, Outcome::kAcceptedInvalid);
  EXPECT_EQ(h.c.producer("alpha")->pending_pulse->index, 2u);
  auto res = h.c.submit("beta", b.next().value, 0, h.view());
  ASSERT_TRUE(res.pulse);
  EXPECT_EQ(res.pulse->r, oracle_r(a.value(2), h.ledger.blocks()[1].hash) ^
                              oracle_r(b.value(2), h.ledger.blocks()[1].hash));
}

TEST(Combine, XorAndMaxOfTimestamps) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(8), 10), b(seed_of(9), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(2);
  const Seconds ts0 = h.ledger.blocks()[0].timestamp;
  h.c.submit("beta", b.next().value, ts0 - 50, h.view());
  auto res = h.c.submit("alpha", a.next().value, ts0 - 90, h.view());
  ASSERT_TRUE(res.pulse);
  // beacons ordered by producer name
  EXPECT_EQ(res.pulse->beacons[0].producer, "alpha");
  EXPECT_EQ(res.pulse->beacons[0].t, ts0 - 90);
  EXPECT_EQ(res.pulse->beacons[1].t, ts0 - 50);
  EXPECT_EQ(res.pulse->t, ts0 - 50);
  EXPECT_EQ(res.pulse->r, res.pulse->beacons[0].r ^ res.pulse->beacons[1].r);
}

TEST(Combine, DigestXorIsBytewise) {
  Digest a, b;
  a.bytes[31] = 0x01;
  b.bytes[31] = 0x02;
  a ^= b;
  EXPECT_EQ(a.bytes[31], 0x03);
  Digest c = a;
  c ^= a;
  EXPECT_TRUE(c.is_zero());
}

TEST(Combine, EqualBeaconsAreRefusedAndVoidTheRound) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(10), 10), b(seed_of(10), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(2);
  h.c.submit("alpha", a.next().value, 0, h.view());
  auto res = h.c.submit("beta", b.next().value, 0, h.view());
  EXPECT_EQ(res.outcome, Outcome::kAcceptedValid);
  EXPECT_FALSE(res.pulse);
  EXPECT_TRUE(h.c.history().empty());
  EXPECT_EQ(count(h.c.events(), EventKind::kZeroCombinedRefused), 1u);
  EXPECT_EQ(h.c.anchor_block(), 2);
  EXPECT_FALSE(h.c.producer("alpha")->pulsed_this_round);
  EXPECT_FALSE(h.c.get_latest(h.view()));
}

TEST(Combine, SingleProducerOutputIsItsBeacon) {
  Multi h;
  h.to_block(1);
  MerlinChain a(seed_of(11), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.to_block(5);
  auto res = h.c.submit("alpha", a.next().value, 0, h.view());
  ASSERT_TRUE(res.pulse);
  EXPECT_EQ(res.pulse->r, res.pulse->beacons[0].r);
  EXPECT_EQ(res.pulse->t, res.pulse->beacons[0].t);
}

TEST(Retrieval, GetPulseAndLatest) {
  Multi h;
  EXPECT_FALSE(h.c.get_latest(h.view()));
  EXPECT_THROW(h.c.get_pulse(0, h.view()), std::out_of_range);
  h.to_block(1);
  MerlinChain a(seed_of(12), 40);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  for (int i = 0; i < 5; ++i) {
    h.to_block(h.c.anchor_block() + 2);
    h.c.submit("alpha", a.next().value, h.ledger.tip().timestamp, h.view());
  }
  ASSERT_EQ(h.c.history().size(), 5u);
  EXPECT_EQ(h.c.get_pulse(3, h.view()), h.c.history()[3]);
  EXPECT_EQ(*h.c.get_latest(h.view()), h.c.history()[4]);
  EXPECT_THROW(h.c.get_pulse(5, h.view()), std::out_of_range);
}

TEST(TimestampRules, ProseVariantUsesPreviousMessage) {
  ContractConfig cfg;
  cfg.timestamp_rule = TimestampRule::kProse;
  Multi h(3, cfg);
  h.to_block(1);
  MerlinChain a(seed_of(13), 10);
  const Seconds reg_u = 1234;
  h.c.register_producer("owner", "alpha", a.next().value, reg_u, h.view());
  const Seconds reg_ts = h.ledger.tip().timestamp;
  h.to_block(2);
  auto res = h.c.submit("alpha", a.next().value, h.ledger.tip().timestamp, h.view());
  ASSERT_TRUE(res.pulse);
  EXPECT_EQ(res.pulse->t, std::min(reg_u, reg_ts));
}

TEST(Stall, ReportsProducersThatHaveNotPulsed) {
  ContractConfig cfg;
  cfg.stall_blocks = 20;
  Multi h(4, cfg);
  h.to_block(1);
  MerlinChain a(seed_of(14), 10), b(seed_of(15), 10);
  h.c.register_producer("owner", "alpha", a.next().value, 0, h.view());
  h.c.register_producer("owner", "beta", b.next().value, 0, h.view());
  h.to_block(2);
  h.c.submit("alpha", a.next().value, 0, h.view());
  h.to_block(25);
  h.c.touch(h.view());
  ASSERT_EQ(count(h.c.events(), EventKind::kRoundStalled), 1u);
  const auto& e = h.c.events().back();
  EXPECT_EQ(e.kind, EventKind::kRoundStalled);
  EXPECT_EQ(e.subjects, std::vector<std::string>{"beta"});
  h.c.touch(h.view());
  EXPECT_EQ(count(h.c.events(), EventKind::kRoundStalled), 1u);
}

namespace {

// Random honest-ish driver used for the invariant and parity checks.
template <class Contract>
std::vector<LighthousePulse> drive(std::uint64_t seed, int blocks, std::vector<ContractEvent>* events) {
  Harness<Contract> h(seed);
  Rng rng(derive_seed(seed, "driver"));
  MerlinChain chain(rng.digest(), static_cast<std::uint64_t>(blocks) + 2);
  h.to_block(1);
  h.c.register_producer("owner", "alpha", chain.next().value, h.ledger.tip().timestamp, h.view());
  std::vector<LighthousePulse> seen;
  for (int b = 2; b <= blocks; ++b) {
    h.to_block(b);
    if (rng.bernoulli(0.6)) {
      h.c.submit("alpha", chain.next().value, h.ledger.tip().timestamp, h.view());
      // prefix immutability
      for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(h.c.history()[i], seen[i]);
      seen = h.c.history();
    }
    if (rng.bernoulli(0.05)) h.to_block(b + 270), b += 270;
  }
  if (events) *events = h.c.events();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_LE(seen[i].t, h.ledger.blocks()[seen[i].block].timestamp);
    if (i > 0) {
      EXPECT_GE(seen[i].block, seen[i - 1].block + 2);
    }
  }
  return seen;
}

}  // namespace

TEST(Invariants, TimeSpacingAndImmutability) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::vector<ContractEvent> ev;
    auto pulses = drive<LighthouseContract>(s, 800, &ev);
    EXPECT_FALSE(pulses.empty());
  }
}

TEST(SingleContract, MatchesMultiContractForOneProducer) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::vector<ContractEvent> em, es;
    auto m = drive<LighthouseContract>(s, 600, &em);
    auto single = drive<SingleProducerContract>(s, 600, &es);
    ASSERT_EQ(m.size(), single.size()) << s;
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(pulse_line(m[i]), pulse_line(single[i]));
    EXPECT_EQ(count(em, EventKind::kHashExpired), count(es, EventKind::kHashExpired));
    EXPECT_EQ(count(em, EventKind::kMessageInvalid), count(es, EventKind::kMessageInvalid));
  }
}

TEST(SingleContract, RejectsSecondProducer) {
  Harness<SingleProducerContract> h;
  h.to_block(1);
  EXPECT_TRUE(h.c.register_producer("owner", "alpha", seed_of(1), 0, h.view()));
  EXPECT_FALSE(h.c.register_producer("owner", "beta", seed_of(2), 0, h.view()));
}

TEST(ContractConfig, ValidationRejectsBadValues) {
  Ledger l(quiet_pool(1));
  ContractConfig cfg;
  cfg.owner = "";
  EXPECT_THROW(LighthouseContract(cfg, l.view()), std::invalid_argument);
  cfg = {};
  cfg.deregister_delay = -1;
  EXPECT_THROW(LighthouseContract(cfg, l.view()), std::invalid_argument);
}
