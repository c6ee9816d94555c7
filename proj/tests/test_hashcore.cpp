#include <openssl/evp.h>

#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lighthouse/hash.hpp"
#include "lighthouse/merlin.hpp"
#include "lighthouse/rng.hpp"

using namespace lighthouse;

namespace {

Digest openssl_sha3(const Bytes& in) {
  Digest out;
  unsigned int len = 0;
  EVP_Digest(in.data(), in.size(), out.bytes.data(), &len, EVP_sha3_256(), nullptr);
  EXPECT_EQ(len, 32u);
  return out;
}

Bytes text(const std::string& s) { return Bytes(s.begin(), s.end()); }

Digest filled(std::uint8_t b) {
  Digest d;
  d.bytes.fill(b);
  return d;
}

}  // namespace

TEST(Hash, EmptyInputMatchesPublishedSha3) {
  EXPECT_EQ(Hasher{}(Bytes{}).hex(), "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
}

TEST(Hash, KnownVectorsAcrossRateBoundary) {
  // Frozen from an independent SHA3 / Keccak implementation.
  struct Case {
    Bytes input;
    const char* sha3;
    const char* keccak;
  };
  std::vector<Case> cases = {
      {text(""), "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a",
       "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"},
      {text("abc"), "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532",
       "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"},
      {Bytes(135, 'a'), "8094bb53c44cfb1e67b7c30447f9a1c33696d2463ecc1d9c92538913392843c9",
       "34367dc248bbd832f4e3e69dfaac2f92638bd0bbd18f2912ba4ef454919cf446"},
      {Bytes(136, 'a'), "3fc5559f14db8e453a0a3091edbd2bc25e11528d81c66fa570a4efdcc2695ee1",
       "a6c4d403279fe3e0af03729caada8374b5ca54d8065329a3ebcaeb4b60aa386e"},
      {Bytes(137, 'a'), "f8d6846cedd2ccfadf15c5879ef95af724d799eed7391fb1c91f95344e738614",
       "d869f639c7046b4929fc92a4d988a8b22c55fbadb802c0c66ebcd484f1915f39"},
  };
  Bytes all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  cases.push_back({all, "9b04c091da96b997afb8f2585d608aebe9c4a904f7d52c8f28c7e4d2dd9fba5f",
                   "dc924469b334aed2a19fac7252e9961aea41f8d91996366029dbe0884229bf36"});

  const Hasher sha3(HashVariant::kSha3_256), keccak(HashVariant::kKeccak256);
  for (const auto& c : cases) {
    EXPECT_EQ(sha3(c.input).hex(), c.sha3) << "len " << c.input.size();
    EXPECT_EQ(keccak(c.input).hex(), c.keccak) << "len " << c.input.size();
  }
}

TEST(Hash, MatchesOpenSslOnRandomInputs) {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    Bytes in(rng.next_u64() % 600);
    for (auto& b : in) b = static_cast<std::uint8_t>(rng.next_u64());
    ASSERT_EQ(Hasher{}(in), openssl_sha3(in)) << "len " << in.size();
  }
}

TEST(Hash, Deterministic) {
  const Bytes x = text("lighthouse");
  EXPECT_EQ(Hasher{}(x), Hasher{}(x));
}

TEST(Hash, NoCollisionsInDeskScaleCorpus) {
  Rng rng(7);
  std::vector<Digest> seen;
  for (int i = 0; i < 10'000; ++i) seen.push_back(Hasher{}(rng.digest()));
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
}

TEST(Hash, ConcatenationOrderIsFirstThenSecond) {
  const Digest a = filled(1), b = filled(2);
  Bytes cat(a.bytes.begin(), a.bytes.end());
  cat.insert(cat.end(), b.bytes.begin(), b.bytes.end());
  EXPECT_EQ(Hasher{}(a, b), openssl_sha3(cat));
  EXPECT_NE(Hasher{}(a, b), Hasher{}(b, a));
}

TEST(Digest, HexRoundTripAndValidation) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    auto d = rng.digest();
    auto h = d.hex();
    EXPECT_EQ(h.size(), 64u);
    EXPECT_TRUE(std::all_of(h.begin(), h.end(), [](char c) { return std::isdigit(c) || (c >= 'a' && c <= 'f'); }));
    EXPECT_EQ(Digest::from_hex(h), d);
  }
  EXPECT_THROW(Digest::from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(Digest::from_hex(std::string(64, 'g')), std::invalid_argument);
}

TEST(Digest, BitIndexing) {
  Digest d;
  d.bytes[0] = 0x01;
  d.bytes[31] = 0x80;
  EXPECT_TRUE(d.bit(0));
  EXPECT_FALSE(d.bit(1));
  EXPECT_TRUE(d.bit(255));
  EXPECT_FALSE(d.bit(254));
}

TEST(Merlin, SingleLinkChain) {
  const Digest s = filled(7);
  MerlinChain c(s, 1);
  EXPECT_EQ(c.value(1), s);
}

TEST(Merlin, ThreeLinkChainMatchesReferenceHash) {
  const Digest s = filled(7);
  MerlinChain c(s, 3);
  const Bytes sb(s.bytes.begin(), s.bytes.end());
  const Digest v2 = openssl_sha3(sb);
  const Digest v1 = openssl_sha3(Bytes(v2.bytes.begin(), v2.bytes.end()));
  EXPECT_EQ(c.value(3), s);
  EXPECT_EQ(c.value(2), v2);
  EXPECT_EQ(c.value(1), v1);
  EXPECT_EQ(c.value(2).hex(), "d87482d1bf7c7585d942f6655a802074851ec456c858eff6c846975a3fee16b6");
  EXPECT_EQ(c.value(1).hex(), "ddd504bb8b67e194a331b629cae4036b8c0dd81a335209391695c77aad4a8858");
}

TEST(Merlin, DifferentLengthsFromOneSeedDifferAtIndexOne) {
  const Digest s = filled(9);
  EXPECT_NE(MerlinChain(s, 5).value(1), MerlinChain(s, 6).value(1));
  EXPECT_EQ(MerlinChain(s, 5).value(1), MerlinChain(s, 6).value(2));
}

TEST(Merlin, ZeroLengthRejected) {
  EXPECT_THROW(MerlinChain(Digest{}, 0), std::invalid_argument);
}

TEST(Merlin, ReleaseOrderAndExhaustion) {
  MerlinChain c(filled(1), 3);
  auto r1 = c.next();
  EXPECT_EQ(r1.index, 1u);
  EXPECT_EQ(r1.value, c.value(1));
  auto r2 = c.next();
  EXPECT_EQ(r2.index, 2u);
  EXPECT_EQ(Hasher{}(r2.value), r1.value);
  c.next();
  EXPECT_TRUE(c.exhausted());
  EXPECT_THROW(c.next(), ChainExhausted);
  EXPECT_THROW(c.peek(), ChainExhausted);
}

TEST(Merlin, LinkCheck) {
  const Digest v = filled(0x42);
  EXPECT_TRUE(merlin_link_ok(Hasher{}(v), v));
  ASSERT_NE(Hasher{}(v), v);
  EXPECT_FALSE(merlin_link_ok(v, v));
  MerlinChain c(v, 50);
  for (std::uint64_t x = 2; x <= 50; ++x) EXPECT_TRUE(merlin_link_ok(c.value(x - 1), c.value(x)));
}

TEST(Merlin, EveryBitFlipBreaksTheLink) {
  Rng rng(11);
  MerlinChain c(rng.digest(), 20);
  for (std::uint64_t x = 2; x <= 20; ++x) {
    for (unsigned bit = 0; bit < 256; ++bit) {
      Digest forged = c.value(x);
      forged.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ASSERT_FALSE(merlin_link_ok(c.value(x - 1), forged)) << "x=" << x << " bit=" << bit;
    }
  }
}

TEST(Merlin, AdjacentValuesAreBitwiseUncorrelated) {
  // Each bit of V_x agrees with the same bit of V_{x-1} half the time.
  Rng rng(5);
  std::vector<std::uint64_t> agree(256, 0);
  const int chains = 10'000;
  for (int i = 0; i < chains; ++i) {
    MerlinChain c(rng.digest(), 2);
    for (unsigned b = 0; b < 256; ++b) agree[b] += c.value(1).bit(b) == c.value(2).bit(b);
  }
  for (unsigned b = 0; b < 256; ++b) {
    const double f = static_cast<double>(agree[b]) / chains;
    EXPECT_NEAR(f, 0.5, 0.02) << "bit " << b;
  }
}

TEST(Merlin, RecoverRestoresCursorAndValues) {
  MerlinChain c(filled(3), 5);
  c.next();
  c.next();
  auto r = MerlinChain::recover(c.checkpoint());
  EXPECT_EQ(r, c);
  auto next = r.next();
  EXPECT_EQ(next.index, 3u);
  EXPECT_EQ(next.value, c.value(3));

  MerlinChain full(filled(3), 5);
  for (int i = 0; i < 5; ++i) full.next();
  EXPECT_TRUE(MerlinChain::recover(full.checkpoint()).exhausted());
}

TEST(Merlin, RecoverIsBitExactForRandomChains) {
  Rng rng(99);
  for (std::uint64_t length : {1u, 2u, 17u, 256u, 1000u, 10'000u}) {
    MerlinChain c(rng.digest(), length);
    const auto releases = rng.next_u64() % (length + 1);
    for (std::uint64_t i = 0; i < releases; ++i) c.next();
    const auto cp = checkpoint_from_json(nlohmann::json::parse(to_json(c.checkpoint()).dump()));
    EXPECT_EQ(cp, c.checkpoint());
    auto r = MerlinChain::recover(cp);
    ASSERT_EQ(r, c) << "length " << length;
    for (std::uint64_t x = 1; x <= length; ++x) ASSERT_EQ(r.value(x), c.value(x));
  }
}

TEST(Merlin, CheckpointJsonShape) {
  ChainCheckpoint cp{filled(0xab), 10, 4};
  auto j = to_json(cp);
  EXPECT_EQ(j.size(), 3u);
  std::string ab;
  for (int i = 0; i < 32; ++i) ab += "ab";
  EXPECT_EQ(j.at("seed_hex"), ab);
  EXPECT_EQ(j.at("length"), 10);
  EXPECT_EQ(j.at("released_up_to"), 4);
  EXPECT_THROW(checkpoint_from_json({{"seed_hex", filled(1).hex()}, {"length", 3}, {"released_up_to", 4}}),
               std::invalid_argument);
  EXPECT_THROW(checkpoint_from_json(
                   {{"seed_hex", filled(1).hex()}, {"length", 3}, {"released_up_to", 1}, {"extra", 1}}),
               std::invalid_argument);
}

TEST(Merlin, KeccakVariantBuildsDifferentChain) {
  const Digest s = filled(5);
  MerlinChain a(s, 3, Hasher(HashVariant::kSha3_256));
  MerlinChain b(s, 3, Hasher(HashVariant::kKeccak256));
  EXPECT_NE(a.value(1), b.value(1));
  EXPECT_TRUE(merlin_link_ok(b.value(1), b.value(2), Hasher(HashVariant::kKeccak256)));
}
