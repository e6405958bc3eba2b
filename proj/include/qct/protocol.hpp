// Bit-commitment session over shared EPR pairs, plus the coin toss built on it.
//
// Honest flow (one Session drives one commitment):
//   init -> source_check -> alice_scramble -> entanglement_check
//        -> bob_scramble -> commit(bit) -> verify(disclosure)
//
// Alice commits by measuring every remaining pair along a random X/Z axis and
// revealing the outcome symbols in direct order (bit 0) or reversed order
// (bit 1, slot k <-> n-1-k, 0-based). Unveiling discloses her Pauli record
// and axes; Bob checks anti-correlation on the positions where the disclosed
// Paulis match his own (the surviving singlets). Out-of-order calls throw
// PhaseError; a failed check parks the session in Aborted.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qct/noise.hpp"
#include "qct/qsim.hpp"
#include "qct/rng.hpp"

namespace qct::protocol {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PhaseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class AxisPolicyKind { FixedSecret, RandomXZ };

struct AxisPolicy {
  AxisPolicyKind kind = AxisPolicyKind::RandomXZ;
  qsim::Axis fixed_axis = qsim::axis_z();

  static AxisPolicy random_xz() { return {AxisPolicyKind::RandomXZ, qsim::axis_z()}; }
  static AxisPolicy fixed(const qsim::Axis& a) { return {AxisPolicyKind::FixedSecret, a}; }

  qsim::Axis draw(Rng& rng) const;
};

enum class VerdictMode { ClaimedOrder, DualOrder };

struct Thresholds {
  double hi = 0.90;
  double lo = 0.84;
};

// Noise-calibrated defaults: hi = max(0.90 - 0.60 p, 0.55), lo = min(0.84,
// hi - 0.02). hi sits several binomial sigmas (at the nominal ~50-singlet
// scale) below the expected committed-order rate 1 - p/2 and far above what
// uncorrelated data can reach; lo guards the wrong order, whose honest
// distribution is centered at 1/2 independent of noise.
Thresholds default_thresholds(double p_total);

struct ProtocolConfig {
  int total_pairs = 300;        // N
  int alice_check_pairs = 50;   // n_a
  int bob_check_pairs = 50;     // n_b
  AxisPolicy axis_policy = AxisPolicy::random_xz();
  VerdictMode verdict_mode = VerdictMode::DualOrder;
  std::optional<Thresholds> thresholds;  // auto-calibrated from noise if unset
  noise::NoiseBudget noise;
  std::uint64_t seed = 1;

  int committed_pairs() const { return total_pairs - alice_check_pairs - bob_check_pairs; }
  Thresholds effective_thresholds() const;
  double total_noise() const;  // env + self composition, honest levels
  void validate() const;       // throws ConfigError
};

// Adversarial wiring of a session; honest defaults.
struct RunOptions {
  bool alice_scrambles = true;
  bool bob_scrambles = true;
  // Defective / rigged source: emits up-down Z-product pairs instead of
  // singlets.
  bool product_source = false;
  // Cheating Alice skips her own source check: the sampled pairs are consumed
  // unmeasured and the check reports a pass.
  bool alice_fakes_source_check = false;
  // Which party (if any) dodges their own self-injected noise by
  // noise.detector_advantage.
  std::optional<qsim::Side> detector_cheater;
};

struct PairSlot {
  qsim::PairState state;
  qsim::PauliOp alice_pauli = qsim::PauliOp::Id;
  qsim::PauliOp bob_pauli = qsim::PauliOp::Id;
  std::optional<qsim::Axis> alice_axis;
  std::optional<qsim::Outcome> alice_outcome;
  bool consumed = false;
};

using PairRegister = std::vector<PairSlot>;

struct CheckResult {
  bool passed = false;
  int checked = 0;
  int failures = 0;
  int allowed = 0;
};

struct CommitmentRecord {
  int bit = 0;
  std::vector<qsim::Axis> axes;          // Alice's measurement axes, position order
  std::vector<qsim::Outcome> outcomes;   // her outcomes d_k
  std::vector<int> revealed;             // public symbol sequence r
};

struct Disclosure {
  int claimed_bit = 0;
  std::vector<qsim::PauliOp> claimed_paulis;
  std::vector<qsim::Axis> claimed_axes;
};

struct Verdict {
  enum class Outcome { Bit0, Bit1, Abort };
  enum class AbortReason {
    None,
    SourceRejected,
    EntanglementRejected,
    EmptySingletSet,
    ThresholdFail,
    Ambiguous,
  };

  Outcome outcome = Outcome::Abort;
  AbortReason reason = AbortReason::None;
  double f_direct = 0.0;
  double f_reverse = 0.0;
  int singlet_count = 0;

  bool is_bit(int b) const {
    return (b == 0 && outcome == Outcome::Bit0) || (b == 1 && outcome == Outcome::Bit1);
  }
  bool aborted() const { return outcome == Outcome::Abort; }
};

std::string to_string(Verdict::Outcome o);
std::string to_string(Verdict::AbortReason r);

struct TranscriptEntry {
  std::string phase;
  std::string sender;
  std::string digest;  // FNV-1a hex of the canonical payload
};

enum class Phase {
  Created,
  Initialized,
  SourceChecked,
  Transmitted,
  EntanglementChecked,
  BobScrambled,
  Committed,
  Verified,
  Aborted,
};

// Positions where the claimed Pauli record matches Bob's own (0-based).
// Throws std::invalid_argument on length mismatch.
std::vector<int> identify_singlets(std::span<const qsim::PauliOp> claimed,
                                   std::span<const qsim::PauliOp> bob_record);

class Session {
 public:
  explicit Session(ProtocolConfig cfg, RunOptions opts = {});

  // Step 1: share N pairs through the environmental channels.
  void init();
  // Step 2: Alice samples n_a pairs and checks anti-correlation.
  CheckResult source_check();
  // Steps 3-4: Alice's Pauli scramble, self-noise injection, transmission.
  void alice_scramble();
  // Steps 5-7: Bob samples n_b pairs, Alice un-scrambles them, Bob checks.
  // alice_honest_unscramble = false makes her re-apply wrong Paulis.
  CheckResult entanglement_check(bool alice_honest_unscramble = true);
  // Step 8 + renumbering: Bob's scramble and self-noise injection.
  void bob_scramble();
  // Steps 9-10: Alice measures all n positions and reveals the symbol
  // sequence for `bit`.
  const CommitmentRecord& commit(int bit);
  // Step 11 payload for an honest Alice.
  Disclosure honest_disclosure() const;
  // Steps 11-12: unveil + Bob's verification.
  Verdict verify(const Disclosure& disclosure);

  Phase phase() const { return phase_; }
  int remaining_pairs() const;
  int committed_size() const;  // n, valid from BobScrambled on
  const ProtocolConfig& config() const { return cfg_; }
  const RunOptions& options() const { return opts_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  const CommitmentRecord& record() const;
  const std::vector<int>& revealed() const;
  const Verdict& verdict() const;
  Verdict::AbortReason abort_reason() const { return abort_reason_; }
  Rng& rng() { return rng_; }

  // --- restricted adversary views -------------------------------------
  // Legal observables only; measurements collapse the real register.

  class BobView {
   public:
    int size() const;
    const std::vector<int>& revealed() const;
    qsim::PauliOp own_pauli(int k) const;
    bool own_scramble_applied() const;
    qsim::Outcome measure_own(int k, const qsim::Axis& axis, Rng& rng);

   private:
    friend class Session;
    explicit BobView(Session& s) : s_(&s) {}
    Session* s_;
  };

  class AliceView {
   public:
    int size() const;
    qsim::PauliOp own_pauli(int k) const;
    const qsim::Axis& axis(int k) const;
    qsim::Outcome outcome(int k) const;
    int committed_bit() const;
    const std::vector<int>& revealed() const;

   private:
    friend class Session;
    explicit AliceView(Session& s) : s_(&s) {}
    Session* s_;
  };

  BobView bob_view();      // valid once committed
  AliceView alice_view();  // valid once committed

 private:
  void require_phase(Phase expected, const char* op) const;
  void fail(Verdict::AbortReason reason);
  CheckResult run_check(int sample_size, double calibrated_noise, bool alice_honest_unscramble,
                        bool unscramble_first, Verdict::AbortReason on_fail, const char* phase_tag,
                        const char* sender);
  std::vector<int> sample_unconsumed(int count);
  void note(const std::string& phase, const std::string& sender, std::uint64_t digest);

  ProtocolConfig cfg_;
  RunOptions opts_;
  Rng rng_;
  PairRegister reg_;
  Phase phase_ = Phase::Created;
  Verdict::AbortReason abort_reason_ = Verdict::AbortReason::None;
  CommitmentRecord record_;
  Verdict verdict_;
  bool has_record_ = false;
  bool has_verdict_ = false;
  std::vector<TranscriptEntry> transcript_;
};

// Allowed failure fraction for a check against expected depolarizing level p:
// 1.5 * p + 3 binomial sigmas of the expected failure rate p/2; exactly zero
// when p = 0.
int check_allowance(int sample_size, double calibrated_noise);

// Convenience: drive one full honest session.
struct RunResult {
  CheckResult source;
  CheckResult entanglement;
  Verdict verdict;
  int committed_bit = 0;
  int committed_size = 0;
  std::vector<TranscriptEntry> transcript;
};

RunResult run_honest(const ProtocolConfig& cfg, int bit, RunOptions opts = {});

// --- coin toss --------------------------------------------------------

struct CoinStrategies {
  // Alice picks the commit bit (default: uniform).
  std::function<int(Rng&)> choose_bit;
  // Bob announces his guess after seeing the revealed sequence (default:
  // uniform; adversarial versions may measure through the view).
  std::function<int(Session&, Rng&)> guess;
  // Alice's unveil, knowing Bob's guess (default: honest disclosure).
  std::function<Disclosure(Session&, int guess, Rng&)> disclose;
};

struct CoinOutcome {
  enum class Result { One, Zero, Abort };

  Result result = Result::Abort;
  Verdict verdict;
  int committed_bit = 0;
  int guess = 0;
  int claimed_bit = 0;
  CheckResult source;
  CheckResult entanglement;
  bool checks_completed = false;
};

// Runs commitment -> guess -> unveil -> verify. Outcome One iff the verified
// bit equals Bob's guess, Zero iff verification passed and they differ; any
// abort (checks or verdict) propagates as Abort. Bob's preferred outcome is
// One, Alice's is Zero.
CoinOutcome coin_toss(const ProtocolConfig& cfg, const RunOptions& opts,
                      const CoinStrategies& strategies, std::uint64_t seed);

}  // namespace qct::protocol
