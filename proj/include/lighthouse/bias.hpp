#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adversary.hpp"
#include "contract.hpp"
#include "hash.hpp"
#include "ledger.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace lighthouse {

// Bias a coalition with fraction F gets on one bit by discarding its own
// blocks: a sub-round ends "desired" w.p. (1-F)/2 + F/2 and restarts w.p.
// F/2, so P(desired) = 1/(2-F) and the bias is F / (2(2-F)).
inline double closed_form_bias(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("F must be in [0, 1]");
  return fraction / (2.0 * (2.0 - fraction));
}

enum class BiasMode { kRawBlockhash, kLighthouseNoCollusion, kLighthouseFullCollusion };

inline std::string_view to_string(BiasMode m) {
  switch (m) {
    case BiasMode::kRawBlockhash: return "raw-blockhash";
    case BiasMode::kLighthouseNoCollusion: return "lighthouse-no-collusion";
    case BiasMode::kLighthouseFullCollusion: return "lighthouse-full-collusion";
  }
  return "unknown";
}

inline BiasMode parse_bias_mode(std::string_view s) {
  for (auto m : {BiasMode::kRawBlockhash, BiasMode::kLighthouseNoCollusion,
                 BiasMode::kLighthouseFullCollusion}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown bias mode '" + std::string(s) + "'");
}

struct BiasRow {
  double fraction = 0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;  // outputs whose target bit took the desired value
  double empirical_bias = 0;
  double closed_form_bias = 0;
  double std_error = 0;
};

struct BiasReport {
  BiasMode mode = BiasMode::kRawBlockhash;
  std::vector<BiasRow> rows;

  std::string table() const {
    std::ostringstream os;
    os << "mode: " << to_string(mode) << "\n";
    os << std::setw(10) << "fraction" << std::setw(12) << "trials" << std::setw(12) << "bias"
       << std::setw(12) << "closed" << std::setw(12) << "std_err" << std::setw(10) << "z" << "\n";
    for (const auto& r : rows) {
      const double z = r.std_error > 0 ? (r.empirical_bias - r.closed_form_bias) / r.std_error : 0.0;
      os << std::fixed << std::setw(10) << std::setprecision(2) << r.fraction << std::setw(12)
         << r.trials << std::setw(12) << std::setprecision(4) << r.empirical_bias << std::setw(12)
         << r.closed_form_bias << std::setw(12) << std::setprecision(5) << r.std_error
         << std::setw(10) << std::setprecision(2) << z << "\n";
    }
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    os << "fraction,trials,hits,empirical_bias,closed_form_bias,std_error\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
      os << r.fraction << ',' << r.trials << ',' << r.hits << ',' << r.empirical_bias << ','
         << r.closed_form_bias << ',' << r.std_error << '\n';
    }
    return os.str();
  }
};

inline BiasRow make_row(double fraction, std::uint64_t trials, std::uint64_t hits, double closed) {
  BiasRow row;
  row.fraction = fraction;
  row.trials = trials;
  row.hits = hits;
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  row.empirical_bias = p - 0.5;
  row.closed_form_bias = closed;
  row.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return row;
}

namespace detail {

// Runs fn(chunk_index, chunk_trials) over fixed-size chunks and sums the
// results in chunk order, so thread count never changes the answer.
inline std::uint64_t sum_chunks(std::uint64_t trials, std::uint64_t chunk,
                                const std::function<std::uint64_t(std::uint64_t, std::uint64_t)>& fn) {
  const std::uint64_t n_chunks = (trials + chunk - 1) / chunk;
  const std::uint64_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t total = 0;
  for (std::uint64_t start = 0; start < n_chunks; start += workers) {
    std::vector<std::future<std::uint64_t>> batch;
    for (std::uint64_t c = start; c < std::min(n_chunks, start + workers); ++c) {
      const std::uint64_t size = std::min(chunk, trials - c * chunk);
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, fn, c, size));
    }
    for (auto& f : batch) total += f.get();
  }
  return total;
}

inline std::uint64_t raw_blockhash_hits(double fraction, std::uint64_t seed, std::uint64_t trials,
                                        BitPredicate predicate, Hasher hasher) {
  MinerPool pool;
  pool.coalition_fraction = fraction;
  pool.rng_seed = seed;
  Ledger ledger(pool, hasher, /*keep_blocks=*/false);
  const MinerStrategy strategy = miner::BitBias{predicate};
  const MinerKnowledge none;
  auto policy = [&](const Block& c) {
    return miner_decide(strategy, c, none, hasher) == Decision::kPublish;
  };
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    if (predicate(ledger.advance({}, policy).hash)) ++hits;
  }
  return hits;
}

inline std::uint64_t lighthouse_hits(BiasMode mode, double fraction, std::uint64_t seed,
                                     std::uint64_t rounds, BitPredicate predicate, Hasher hasher) {
  ScenarioConfig cfg;
  cfg.master_seed = seed;
  cfg.blocks = static_cast<BlockNumber>(4 * rounds + 64);
  cfg.max_pulses = rounds;
  cfg.miner_fraction = fraction;
  cfg.contract.hasher = hasher;
  cfg.contract.stall_blocks = 0;
  cfg.producers.push_back({"producer", 0, producer::Honest{2}, {}});
  if (mode == BiasMode::kLighthouseFullCollusion) {
    cfg.miner = miner::ProducerColluder{{"producer"}, predicate};
  } else {
    // The coalition has no V, so the best it can aim at is the round block's hash.
    cfg.miner = miner::BitBias{predicate};
  }
  const auto result = run_scenario(cfg);
  if (result.pulses.size() != rounds) {
    throw std::runtime_error("lighthouse bias run produced " + std::to_string(result.pulses.size()) +
                             " pulses, wanted " + std::to_string(rounds));
  }
  std::uint64_t hits = 0;
  for (const auto& p : result.pulses) {
    if (predicate(p.r)) ++hits;
  }
  return hits;
}

}  // namespace detail

struct BiasOptions {
  BitPredicate predicate{0, true};
  Hasher hasher{};
  std::uint64_t raw_chunk = 100'000;
  std::uint64_t lighthouse_chunk = 10'000;
};

inline constexpr std::uint64_t kMinBiasTrials = 10'000;

// Trial seeds: derive_seed(seed, {mode, bits of F, chunk index}).
inline BiasReport bias_experiment(const std::vector<double>& fractions, std::uint64_t trials,
                                  std::uint64_t seed, BiasMode mode, const BiasOptions& opts = {}) {
  if (fractions.empty()) throw std::invalid_argument("fraction list is empty");
  if (trials < kMinBiasTrials) {
    throw std::invalid_argument("bias experiments need at least " + std::to_string(kMinBiasTrials) +
                                " trials");
  }
  opts.predicate.validate();
  for (double f : fractions) closed_form_bias(f);

  BiasReport report;
  report.mode = mode;
  for (double f : fractions) {
    const std::uint64_t mode_id = static_cast<std::uint64_t>(mode);
    const std::uint64_t f_bits = std::bit_cast<std::uint64_t>(f);
    std::uint64_t hits = 0;
    double closed = 0.0;
    if (mode == BiasMode::kRawBlockhash) {
      closed = closed_form_bias(f);
      hits = detail::sum_chunks(trials, opts.raw_chunk, [&](std::uint64_t c, std::uint64_t n) {
        return detail::raw_blockhash_hits(f, derive_seed(seed, {mode_id, f_bits, c}), n,
                                          opts.predicate, opts.hasher);
      });
    } else {
      closed = mode == BiasMode::kLighthouseFullCollusion ? closed_form_bias(f) : 0.0;
      hits = detail::sum_chunks(trials, opts.lighthouse_chunk, [&](std::uint64_t c, std::uint64_t n) {
        return detail::lighthouse_hits(mode, f, derive_seed(seed, {mode_id, f_bits, c}), n,
                                       opts.predicate, opts.hasher);
      });
    }
    report.rows.push_back(make_row(f, trials, hits, closed));
  }
  return report;
}

struct InfluenceEstimate {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double bias = 0;
  double std_error = 0;
  double expected = 0;
};

inline InfluenceEstimate make_estimate(std::uint64_t trials, std::uint64_t hits, double expected) {
  auto row = make_row(0.0, trials, hits, expected);
  return {trials, hits, row.empirical_bias, row.std_error, expected};
}

// Producer without a commitment: sees H first, then tries up to k fresh V
// until R = hash(H || V) has the wanted bit. Success probability 1 - 2^-k,
// so the bias is 0.5 - 2^-k.
inline InfluenceEstimate naive_combine_demo(std::uint64_t k_attempts, std::uint64_t trials,
                                            std::uint64_t seed, BitPredicate predicate = {},
                                            Hasher hasher = {}) {
  if (k_attempts < 1) throw std::invalid_argument("k_attempts must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  Rng rng(derive_seed(seed, "naive-combine"));
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const Digest h = rng.digest();
    for (std::uint64_t attempt = 0; attempt < k_attempts; ++attempt) {
      if (predicate(hasher(h, rng.digest()))) {
        ++hits;
        break;
      }
    }
  }
  return make_estimate(trials, hits, 0.5 - std::pow(0.5, static_cast<double>(k_attempts)));
}

// t colluding producers against one honest producer. After the honest beacon
// pulses, the colluders pick which of them reveal; the withheld ones stall the
// round until the owner deregisters them, and the lighthouse then pulses from
// whoever revealed. That is 2^t candidate outputs per round, bought with
// public deregistrations. Runs each trial on a fresh contract and chain.
inline InfluenceEstimate withholding_influence(unsigned t, std::uint64_t trials, std::uint64_t seed,
                                               BitPredicate predicate = {}, Hasher hasher = {},
                                               BlockNumber deregister_delay = 10) {
  if (t < 1 || t > 16) throw std::invalid_argument("t must be in [1, 16]");
  std::uint64_t hits = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    MinerPool pool;
    pool.rng_seed = derive_seed(seed, {t, trial, 0});
    Ledger ledger(pool, hasher, /*keep_blocks=*/false);
    ContractConfig cc;
    cc.hasher = hasher;
    cc.deregister_delay = deregister_delay;
    cc.stall_blocks = 0;
    LighthouseContract contract(cc, ledger.view());

    std::vector<std::string> names{"honest"};
    for (unsigned i = 1; i <= t; ++i) names.push_back("colluder" + std::to_string(i));
    std::vector<MerlinChain> chains;
    for (std::size_t i = 0; i < names.size(); ++i) {
      chains.emplace_back(seed_digest(derive_seed(seed, {t, trial, i + 1}), names[i], hasher), 4, hasher);
    }

    auto run_block = [&](std::vector<tx::Message> msgs) {
      std::vector<Bytes> payloads;
      for (const auto& m : msgs) payloads.push_back(tx::encode(m));
      ledger.advance(std::move(payloads));
      for (const auto& m : msgs) contract.apply(m, ledger.view());
    };

    std::vector<tx::Message> regs;
    for (std::size_t i = 0; i < names.size(); ++i) {
      regs.push_back(tx::Register{cc.owner, names[i], chains[i].next().value, ledger.tip().timestamp});
    }
    run_block(std::move(regs));
    run_block({tx::Submit{"honest", chains[0].next().value, ledger.tip().timestamp}});

    const Digest target = *contract.cached_target_hash();
    const Digest honest_r = contract.producer("honest")->pending_pulse->r;
    std::vector<Digest> colluder_r;
    for (unsigned i = 1; i <= t; ++i) colluder_r.push_back(hasher(chains[i].peek(), target));

    std::uint32_t withheld = 0;
    for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
      Digest r = honest_r;
      for (unsigned i = 0; i < t; ++i) {
        if (!(mask & (1u << i))) r ^= colluder_r[i];
      }
      if (predicate(r)) {
        withheld = mask;
        break;
      }
    }

    std::vector<tx::Message> moves;
    for (unsigned i = 0; i < t; ++i) {
      if (withheld & (1u << i)) {
        moves.push_back(tx::Deregister{cc.owner, names[i + 1]});
      } else {
        moves.push_back(tx::Submit{names[i + 1], chains[i + 1].next().value, ledger.tip().timestamp});
      }
    }
    run_block(std::move(moves));
    for (BlockNumber i = 0; contract.history().empty() && i <= deregister_delay + 1; ++i) {
      run_block({tx::Retrieve{"customer"}});
    }
    if (contract.history().size() != 1) throw std::logic_error("withholding round did not pulse");
    if (predicate(contract.history().back().r)) ++hits;
  }
  return make_estimate(trials, hits, 0.5 - std::pow(0.5, t + 1.0));
}

}  // namespace lighthouse
