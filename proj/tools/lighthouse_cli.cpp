// lighthouse: run scenarios, reproduce the block-withholding bias table,
// demonstrate the uncommitted-producer flaw and verify pulse logs.
//
// Exit codes: 0 success / verification passed, 1 verification failed,
// 2 configuration or input error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lighthouse/lighthouse.hpp"

namespace fs = std::filesystem;
using namespace lighthouse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> parse_fractions(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    double f = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad fraction '" + item + "'");
    out.push_back(f);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lighthouse public-randomness simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and write pulse, event and block logs");
  std::string config_path;
  std::string run_out = "out";
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->add_option("--seed", run_seed, "Override master_seed");
  run->add_option("--out", run_out, "Output directory");

  // bias
  auto* bias = app.add_subcommand("bias", "Estimate the bias a mining coalition gets on one output bit");
  std::string mode = "raw-blockhash";
  std::string fractions = "0.05,0.1,0.2,0.3,0.4,0.5";
  std::uint64_t trials = 1'000'000;
  std::uint64_t bias_seed = 1;
  unsigned bit = 0;
  bool csv = false;
  std::string bias_out;
  bias->add_option("--mode", mode, "raw-blockhash | lighthouse-no-collusion | lighthouse-full-collusion");
  bias->add_option("--fractions", fractions, "Comma-separated coalition fractions");
  bias->add_option("--trials", trials, "Trials per fraction (>= 10000)");
  bias->add_option("--seed", bias_seed, "Master seed");
  bias->add_option("--bit", bit, "Targeted bit index");
  bias->add_flag("--csv", csv, "Emit CSV instead of an aligned table");
  bias->add_option("--out", bias_out, "Also write the report to this file");

  // naive-demo
  auto* naive = app.add_subcommand("naive-demo", "Bias from a producer who picks V after seeing H");
  std::uint64_t k_attempts = 10;
  std::uint64_t naive_trials = 100'000;
  std::uint64_t naive_seed = 1;
  std::string naive_out;
  naive->add_option("--k", k_attempts, "Candidate V values per trial");
  naive->add_option("--trials", naive_trials, "Trials");
  naive->add_option("--seed", naive_seed, "Master seed");
  naive->add_option("--out", naive_out, "Also write the JSON result to this file");

  // verify
  auto* verify = app.add_subcommand("verify", "Recompute a pulse log from block data");
  std::string pulses_path, blocks_path, verify_out;
  std::string hash_name = "sha3-256";
  std::string ts_rule = "eq2";
  std::string owner = "owner";
  BlockNumber dereg_delay = 10;
  std::uint64_t verify_seed = 0;
  verify->add_option("--pulses", pulses_path, "Pulse log (JSON lines)")->required();
  verify->add_option("--blocks", blocks_path, "Block log (JSON lines)")->required();
  verify->add_option("--hash", hash_name, "sha3-256 | keccak-256");
  verify->add_option("--timestamp-rule", ts_rule, "eq2 | prose");
  verify->add_option("--owner", owner, "Contract owner identity");
  verify->add_option("--deregister-delay", dereg_delay, "Contract deregistration delay in blocks");
  verify->add_option("--seed", verify_seed, "Accepted for uniformity; verification is deterministic");
  verify->add_option("--out", verify_out, "Also write the verdict to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      ScenarioConfig cfg;
      try {
        auto j = nlohmann::json::parse(read_file(config_path));
        if (run_seed) j["master_seed"] = *run_seed;
        cfg = parse_scenario(j);
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      auto result = run_scenario(cfg);
      write_outputs(cfg, result, run_out);
      std::cout << to_json(result.summary).dump(2) << "\n";
      return kExitOk;
    }

    if (bias->parsed()) {
      BiasReport report;
      try {
        BiasOptions opts;
        opts.predicate = {bit, true};
        report = bias_experiment(parse_fractions(fractions), trials, bias_seed, parse_bias_mode(mode), opts);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      const std::string text = csv ? report.csv() : report.table();
      std::cout << text;
      if (!bias_out.empty()) write_file(bias_out, text);
      return kExitOk;
    }

    if (naive->parsed()) {
      InfluenceEstimate est;
      try {
        est = naive_combine_demo(k_attempts, naive_trials, naive_seed);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      nlohmann::json j = {{"k", k_attempts},        {"trials", est.trials},
                          {"hits", est.hits},       {"bias", est.bias},
                          {"std_error", est.std_error}, {"expected", est.expected}};
      std::cout << j.dump(2) << "\n";
      if (!naive_out.empty()) write_file(naive_out, j.dump(2) + "\n");
      return kExitOk;
    }

    if (verify->parsed()) {
      VerifyOptions opts;
      Verdict verdict;
      try {
        opts.hasher = Hasher(parse_hash_variant(hash_name));
        opts.timestamp_rule = parse_timestamp_rule(ts_rule);
        opts.owner = owner;
        opts.deregister_delay = dereg_delay;
        verdict = verify_log_text(read_file(pulses_path), read_file(blocks_path), opts);
      } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
      }
      std::cout << verdict.report();
      if (!verify_out.empty()) write_file(verify_out, verdict.report());
      return verdict.ok() ? kExitOk : kExitVerifyFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
