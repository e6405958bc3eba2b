// Command-line front end: honest runs, attack harnesses, parameter sweeps.
// Exit codes: 0 success, 1 protocol abort / verdict mismatch, 2 usage or
// config error.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qct/adversary.hpp"
#include "qct/protocol.hpp"
#include "qct/report.hpp"
#include "qct/rng.hpp"

namespace {

using qct::report::Json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double; keeps CSV cells
// byte-stable across runs.
std::string num(double v) { return Json(v).dump(); }

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool has_seed = false;
  double noise_total = 0.0;
  bool has_noise = false;
  std::string verdict;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    auto* seed_opt =
        cmd->add_option("--seed", seed, "RNG seed (overrides config)")->envname("QCT_SEED");
    auto* noise_opt = cmd->add_option("--noise", noise_total,
                                      "total environmental depolarizing level, split "
                                      "evenly over both channels")
                          ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--verdict", verdict, "verdict rule")
        ->check(CLI::IsMember({"claimed", "dual"}));
    cmd->parse_complete_callback([this, seed_opt, noise_opt] {
      has_seed = seed_opt->count() > 0;
      has_noise = noise_opt->count() > 0;
    });
  }

  qct::protocol::ProtocolConfig build() const {
    qct::protocol::ProtocolConfig cfg;
    if (!config_path.empty()) cfg = qct::report::load_config_file(config_path);
    if (has_noise) {
      const double per_side = 1.0 - std::sqrt(1.0 - noise_total);
      cfg.noise.env_a = per_side;
      cfg.noise.env_b = per_side;
    }
    if (!verdict.empty()) {
      cfg.verdict_mode = verdict == "dual" ? qct::protocol::VerdictMode::DualOrder
                                           : qct::protocol::VerdictMode::ClaimedOrder;
    }
    if (has_seed) cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

void stamp_timing(Json& j, std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::steady_clock::now() - start;
  Json t = Json::object();
  t["wall_ms"] =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  j["timing"] = t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

// Validates, then writes to `path` or stdout when the path is empty.
void emit_report(const Json& j, const std::string& path) {
  qct::report::validate_report(j);
  const std::string text = qct::report::render(j);
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

// --- run -------------------------------------------------------------------

int cmd_run(const CommonOpts& common, int bit, bool coin_mode, const std::string& out_path) {
  const auto start = std::chrono::steady_clock::now();
  const qct::protocol::ProtocolConfig cfg = common.build();
  qct::protocol::RunResult result;
  Json coin = nullptr;
  int exit_code = 0;
  if (coin_mode) {
    const qct::protocol::CoinOutcome out = qct::protocol::coin_toss(cfg, {}, {}, cfg.seed);
    result.source = out.source;
    result.entanglement = out.entanglement;
    result.verdict = out.verdict;
    result.committed_bit = out.committed_bit;
    result.committed_size = cfg.committed_pairs();
    coin = Json::object();
    const char* name = out.result == qct::protocol::CoinOutcome::Result::One    ? "one"
                       : out.result == qct::protocol::CoinOutcome::Result::Zero ? "zero"
                                                                                : "abort";
    coin["result"] = name;
    coin["committed_bit"] = out.committed_bit;
    coin["guess"] = out.guess;
    exit_code = out.result == qct::protocol::CoinOutcome::Result::Abort ? 1 : 0;
  } else {
    result = qct::protocol::run_honest(cfg, bit);
    exit_code = result.verdict.is_bit(bit) ? 0 : 1;
  }
  Json j = qct::report::run_report(cfg, result);
  j["coin"] = coin;
  stamp_timing(j, start);
  emit_report(j, out_path);
  return exit_code;
}

// --- attack ----------------------------------------------------------------

std::string attack_csv(const qct::adversary::BiasReport& b) {
  std::string out =
      "alice,bob,suppression,runs,p_alice,epsilon_alice,epsilon_alice_hw,p_bob,"
      "epsilon_bob,epsilon_bob_hw,abort_rate,guess_accuracy,flip_attempts,flip_successes,"
      "em_anticorrelation\n";
  out += qct::adversary::to_string(b.alice) + "," + qct::adversary::to_string(b.bob) + "," +
         qct::adversary::to_string(b.suppression) + "," + std::to_string(b.runs) + "," +
         num(b.p_alice_all) + "," + num(b.eps_alice_all.center) + "," +
         num(b.eps_alice_all.half_width) + "," + num(b.p_bob_all) + "," +
         num(b.eps_bob_all.center) + "," + num(b.eps_bob_all.half_width) + "," +
         num(b.abort_rate) + "," + num(b.guess_accuracy) + "," + std::to_string(b.flip_attempts) +
         "," + std::to_string(b.flip_successes) + "," + num(b.em_anticorrelation) + "\n";
  return out;
}

int cmd_attack(const CommonOpts& common, const std::string& alice_name,
               const std::string& bob_name, const std::string& suppression_name, int runs,
               int threads, const std::string& csv_path, const std::string& json_path) {
  const auto start = std::chrono::steady_clock::now();
  const qct::protocol::ProtocolConfig cfg = common.build();
  const auto alice = qct::adversary::parse_alice_strategy(alice_name);
  const auto bob = qct::adversary::parse_bob_strategy(bob_name);
  const auto suppression = qct::adversary::parse_suppression(suppression_name);
  if (!alice) throw UsageError("unknown alice strategy '" + alice_name + "'");
  if (!bob) throw UsageError("unknown bob strategy '" + bob_name + "'");
  if (!suppression) throw UsageError("unknown suppression mode '" + suppression_name + "'");
  const qct::adversary::BiasReport bias =
      qct::adversary::estimate_bias(cfg, *alice, *bob, *suppression, runs, cfg.seed, threads);
  Json j = qct::report::attack_report(cfg, bias);
  stamp_timing(j, start);
  if (!csv_path.empty()) write_text(csv_path, attack_csv(bias));
  if (!json_path.empty()) {
    emit_report(j, json_path);
  } else if (csv_path.empty()) {
    emit_report(j, "");
  }
  return 0;
}

// --- sweep -----------------------------------------------------------------

std::vector<double> sweep_values(double from, double to, double step) {
  if (to < from) throw UsageError("empty sweep range: --to is below --from");
  if (from == to) return {from};
  if (step <= 0.0) throw UsageError("empty sweep range: --step must be positive");
  const double count = std::floor((to - from) / step + 1e-9) + 1.0;
  if (count > 100000.0) throw UsageError("sweep range produces too many values");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < static_cast<int>(count); ++i) values.push_back(from + step * i);
  return values;
}

qct::report::SweepRow honest_row(const qct::protocol::ProtocolConfig& cfg, double value, int runs,
                                 std::uint64_t value_seed) {
  qct::report::SweepRow row;
  row.value = value;
  int successes = 0;
  int aborts = 0;
  int verdict_runs = 0;
  double f_direct = 0.0;
  double f_reverse = 0.0;
  double singlets = 0.0;
  for (int i = 0; i < runs; ++i) {
    qct::protocol::ProtocolConfig local = cfg;
    local.seed = qct::derive_seed(value_seed, static_cast<std::uint64_t>(i));
    const int bit = i & 1;
    const qct::protocol::RunResult res = qct::protocol::run_honest(local, bit);
    if (res.verdict.is_bit(bit)) ++successes;
    if (res.verdict.aborted()) ++aborts;
    if (res.source.passed && res.entanglement.passed) {
      ++verdict_runs;
      f_direct += res.verdict.f_direct;
      f_reverse += res.verdict.f_reverse;
      singlets += res.verdict.singlet_count;
    }
  }
  row.success_rate = runs > 0 ? static_cast<double>(successes) / runs : 0.0;
  row.abort_rate = runs > 0 ? static_cast<double>(aborts) / runs : 0.0;
  if (verdict_runs > 0) {
    row.f_direct_mean = f_direct / verdict_runs;
    row.f_reverse_mean = f_reverse / verdict_runs;
    row.singlet_mean = singlets / verdict_runs;
  }
  return row;
}

// Detector sweep: Bob early-measures while his own suppression rides on
// injected noise (self_b) that the advantage lets him dodge; the success
// column is his guess accuracy.
qct::report::SweepRow detector_row(const qct::protocol::ProtocolConfig& cfg, double value,
                                   int runs, std::uint64_t value_seed, int threads) {
  qct::protocol::ProtocolConfig local = cfg;
  local.noise.detector_advantage = value;
  if (local.noise.self_b == 0.0) local.noise.self_b = 1.0;
  const qct::adversary::BiasReport bias = qct::adversary::estimate_bias(
      local, qct::adversary::AliceStrategy::Honest, qct::adversary::BobStrategy::EarlyMeasure,
      qct::adversary::SuppressionMode::None, runs, value_seed, threads);
  qct::report::SweepRow row;
  row.value = value;
  row.success_rate = bias.guess_accuracy;
  row.abort_rate = bias.abort_rate;
  row.f_direct_mean = bias.mean_f_direct;
  row.f_reverse_mean = bias.mean_f_reverse;
  row.singlet_mean = bias.mean_singlets;
  return row;
}

int cmd_sweep(const CommonOpts& common, const std::string& param, double from, double to,
              double step, int runs, int threads, const std::string& csv_path,
              const std::string& json_path) {
  const auto start = std::chrono::steady_clock::now();
  const qct::protocol::ProtocolConfig cfg = common.build();
  const std::vector<double> values = sweep_values(from, to, step);
  std::vector<qct::report::SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const double v = values[idx];
    const std::uint64_t value_seed = qct::derive_seed(cfg.seed, 0x53574545u + idx);
    if (param == "noise") {
      if (v > 1.0) throw UsageError("noise values must lie in [0, 1]");
      qct::protocol::ProtocolConfig local = cfg;
      const double per_side = 1.0 - std::sqrt(1.0 - v);
      local.noise.env_a = per_side;
      local.noise.env_b = per_side;
      rows.push_back(honest_row(local, v, runs, value_seed));
    } else if (param == "n") {
      const int n = static_cast<int>(std::lround(v));
      if (n < 1) throw UsageError("n values must be at least 1");
      qct::protocol::ProtocolConfig local = cfg;
      local.total_pairs = n + local.alice_check_pairs + local.bob_check_pairs;
      rows.push_back(honest_row(local, v, runs, value_seed));
    } else if (param == "theta-hi") {
      if (!(v > 0.0 && v <= 1.0)) throw UsageError("theta-hi values must lie in (0, 1]");
      qct::protocol::ProtocolConfig local = cfg;
      local.thresholds = qct::protocol::Thresholds{v, std::max(v - 0.02, 0.0)};
      rows.push_back(honest_row(local, v, runs, value_seed));
    } else {  // detector-advantage
      if (v > 1.0) throw UsageError("detector-advantage values must lie in [0, 1]");
      rows.push_back(detector_row(cfg, v, runs, value_seed, threads));
    }
  }
  const std::string csv = qct::report::sweep_csv(rows);
  if (!csv_path.empty()) {
    write_text(csv_path, csv);
  } else {
    std::cout << csv;
  }
  if (!json_path.empty()) {
    Json j = qct::report::sweep_report(cfg, param, runs, rows);
    stamp_timing(j, start);
    emit_report(j, json_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EPR-pair bit-commitment and coin-toss simulator"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run one honest commitment session");
  CommonOpts run_common;
  int bit = 0;
  bool coin_mode = false;
  std::string run_out;
  auto* bit_opt = run->add_option("--bit", bit, "bit to commit")->check(CLI::Range(0, 1));
  run->add_flag("--coin", coin_mode, "run one honest coin toss instead")->excludes(bit_opt);
  run->add_option("--out", run_out, "write the report here instead of stdout");
  run_common.attach(run);

  CLI::App* attack = app.add_subcommand("attack", "estimate coin bias under attack");
  CommonOpts attack_common;
  std::string alice_name = "honest";
  std::string bob_name = "honest";
  std::string suppression_name = "both";
  int attack_runs = 1000;
  int attack_threads = 0;
  std::string attack_csv_path;
  std::string attack_json_path;
  attack->add_option("--alice", alice_name, "alice strategy")
      ->check(CLI::IsMember({"honest", "wrong-disclosure", "reversal", "product-source"}));
  attack->add_option("--bob", bob_name, "bob strategy")
      ->check(CLI::IsMember({"honest", "early-measure", "early-measure-unscrambled"}));
  attack->add_option("--suppression", suppression_name, "who performs the scramble step")
      ->check(CLI::IsMember({"both", "alice-only", "bob-only", "none"}));
  attack->add_option("--runs", attack_runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  attack->add_option("--threads", attack_threads, "worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  attack->add_option("--csv", attack_csv_path, "write a one-row CSV summary here");
  attack->add_option("--json", attack_json_path, "write the JSON report here");
  attack_common.attach(attack);

  CLI::App* sweep = app.add_subcommand("sweep", "sweep a parameter, one CSV row per value");
  CommonOpts sweep_common;
  std::string param;
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  int sweep_runs = 200;
  int sweep_threads = 0;
  std::string sweep_csv_path;
  std::string sweep_json_path;
  sweep->add_option("--param", param, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"noise", "n", "theta-hi", "detector-advantage"}));
  sweep->add_option("--from", from, "first value")->required();
  auto* to_opt = sweep->add_option("--to", to, "last value (default: --from)");
  sweep->add_option("--step", step, "increment");
  sweep->add_option("--runs", sweep_runs, "runs per value")->check(CLI::PositiveNumber);
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--csv", sweep_csv_path, "write the CSV table here instead of stdout");
  sweep->add_option("--json", sweep_json_path, "also write a JSON report here");
  sweep_common.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_common, bit, coin_mode, run_out);
    if (attack->parsed()) {
      return cmd_attack(attack_common, alice_name, bob_name, suppression_name, attack_runs,
                        attack_threads, attack_csv_path, attack_json_path);
    }
    if (to_opt->count() == 0) to = from;
    return cmd_sweep(sweep_common, param, from, to, step, sweep_runs, sweep_threads,
                     sweep_csv_path, sweep_json_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qct::protocol::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qct::report::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
