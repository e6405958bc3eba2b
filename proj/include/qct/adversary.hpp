// Adversary strategies and the coin-bias measurement harness.
//
// Every attack works through the Session views: measurements collapse the
// real register, and nobody reads the other party's private records.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qct/protocol.hpp"

namespace qct::adversary {

enum class AliceStrategy { Honest, WrongDisclosure, ReversalNoSuppression, ProductStateSource };
enum class BobStrategy { HonestGuess, EarlyMeasure, NoSuppressEarlyMeasure };

// Which parties perform their Pauli scramble step.
enum class SuppressionMode { Both, AliceOnly, BobOnly, None };

std::string to_string(AliceStrategy s);
std::string to_string(BobStrategy s);
std::string to_string(SuppressionMode m);
std::optional<AliceStrategy> parse_alice_strategy(const std::string& name);
std::optional<BobStrategy> parse_bob_strategy(const std::string& name);
std::optional<SuppressionMode> parse_suppression(const std::string& name);

bool alice_scrambles(SuppressionMode m);
bool bob_scrambles(SuppressionMode m);

// --- individual attack primitives --------------------------------------

struct EarlyMeasureResult {
  int guessed_bit = 0;
  int pairs = 0;
  int direct_mismatches = 0;   // Bob's symbol vs r_k
  int reverse_mismatches = 0;  // Bob's symbol vs r_{n-1-k}
};

// Bob measures each of his particles along a fresh uniform X/Z axis, compares
// symbols against the revealed sequence in both orders, and guesses the bit
// whose order shows more anti-correlation (ties: coin flip).
EarlyMeasureResult bob_early_measure(protocol::Session::BobView& view, Rng& rng);

// Forged disclosure claiming `target_bit`: fresh uniform Paulis relocate the
// singlet set at random; axes are disclosed truthfully.
protocol::Disclosure alice_wrong_disclosure(const protocol::Session::AliceView& view,
                                            int target_bit, Rng& rng);

enum class AxisClaimPolicy { KeepTrue, RandomizeXZ };

struct ReversalPlan {
  protocol::Disclosure disclosure;
  int selectable = 0;  // size of the provably anti-correlating position set
  int total = 0;
};

// Reversal attack: assuming Bob left his particles unscrambled, Alice can
// predict his verification outcome at every position whose claimed axis is
// her true axis, and she claims singlets exactly where the reversed-order
// comparison is guaranteed to anti-correlate. Returns nullopt
// (InsufficientPositions) when fewer than a quarter of the expected singlet
// count qualifies.
std::optional<ReversalPlan> alice_reversal_no_suppression(
    const protocol::Session::AliceView& view, int target_bit, Rng& rng,
    AxisClaimPolicy axis_claims = AxisClaimPolicy::KeepTrue);

// --- aggregated harnesses ----------------------------------------------

struct Interval {
  double center = 0.0;
  double half_width = 0.0;  // 95% normal-approximation CI

  bool contains(double v) const { return v >= center - half_width && v <= center + half_width; }
};

Interval proportion_ci(double successes, double trials);

struct BiasReport {
  AliceStrategy alice = AliceStrategy::Honest;
  BobStrategy bob = BobStrategy::HonestGuess;
  SuppressionMode suppression = SuppressionMode::Both;
  int runs = 0;
  int outcome_one = 0;
  int outcome_zero = 0;
  int aborts = 0;

  // Aborts counted as the party failing to reach their preferred outcome.
  double p_alice_all = 0.0;  // P(outcome 0)
  double p_bob_all = 0.0;    // P(outcome 1)
  Interval eps_alice_all;    // p - 1/2
  Interval eps_bob_all;

  // Aborts excluded.
  int completed = 0;
  double p_alice_completed = 0.0;
  double p_bob_completed = 0.0;
  Interval eps_alice_completed;
  Interval eps_bob_completed;

  double abort_rate = 0.0;

  // Diagnostics.
  int guess_correct = 0;       // Bob's guess == committed bit
  double guess_accuracy = 0.0;
  int flip_attempts = 0;       // Alice forged a disclosure
  int flip_successes = 0;      // ... and the forged bit was verified
  double mean_f_direct = 0.0;  // over runs that reached a verdict computation
  double mean_f_reverse = 0.0;
  double mean_singlets = 0.0;
  int verdict_runs = 0;

  // Early-measure per-pair aggregation (committed order).
  long long em_pairs = 0;
  long long em_committed_mismatches = 0;
  double em_anticorrelation = 0.0;
};

// Monte Carlo coin tosses with per-run seeds derived from (seed, run index);
// runs are distributed over `threads` workers (0 = hardware concurrency) and
// the aggregation is order-independent, so the report is identical for any
// worker count.
BiasReport estimate_bias(const protocol::ProtocolConfig& cfg, AliceStrategy alice,
                         BobStrategy bob, SuppressionMode suppression, int runs,
                         std::uint64_t seed, int threads = 0);

// Forced-forgery trials: every run commits a uniform bit and Alice forges the
// opposite one (no coin-toss gating). Used to measure raw flip success.
struct ForgeryReport {
  int runs = 0;
  int attempts = 0;       // runs where a forged disclosure was produced
  int successes = 0;      // verified as the forged bit
  int aborts = 0;
  int honest_fallbacks = 0;  // reversal had too few selectable positions
  double success_rate = 0.0;
  double abort_rate = 0.0;
  double mean_selectable_fraction = 0.0;  // reversal only
};

ForgeryReport run_forgery_trials(const protocol::ProtocolConfig& cfg, AliceStrategy alice,
                                 SuppressionMode suppression, int runs, std::uint64_t seed,
                                 int threads = 0,
                                 AxisClaimPolicy axis_claims = AxisClaimPolicy::KeepTrue);

}  // namespace qct::adversary
