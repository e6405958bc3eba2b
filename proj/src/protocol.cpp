#include "qct/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qct/digest.hpp"

namespace qct::protocol {

qsim::Axis AxisPolicy::draw(Rng& rng) const {
  if (kind == AxisPolicyKind::FixedSecret) return fixed_axis;
  return qsim::random_xz(rng);
}

Thresholds default_thresholds(double p_total) {
  if (!(p_total >= 0.0 && p_total <= 1.0)) {
    throw std::invalid_argument("default_thresholds: p_total must lie in [0, 1]");
  }
  Thresholds t;
  t.hi = std::max(0.90 - 0.60 * p_total, 0.55);
  t.lo = std::min(0.84, t.hi - 0.02);
  return t;
}

Thresholds ProtocolConfig::effective_thresholds() const {
  return thresholds ? *thresholds : default_thresholds(total_noise());
}

double ProtocolConfig::total_noise() const {
  const double levels[] = {noise.env_a, noise.env_b, noise.self_a, noise.self_b};
  return qct::noise::compose(levels);
}

void ProtocolConfig::validate() const {
  if (total_pairs <= 0) throw ConfigError("total_pairs must be positive");
  if (alice_check_pairs < 0 || bob_check_pairs < 0) {
    throw ConfigError("check sample sizes must be nonnegative");
  }
  if (committed_pairs() <= 0) {
    throw ConfigError("total_pairs must exceed alice_check_pairs + bob_check_pairs");
  }
  if (axis_policy.kind == AxisPolicyKind::FixedSecret && !axis_policy.fixed_axis.is_unit()) {
    throw ConfigError("fixed check axis must be a unit vector");
  }
  if (thresholds) {
    if (!(thresholds->hi > 0.0 && thresholds->hi <= 1.0) ||
        !(thresholds->lo >= 0.0 && thresholds->lo <= 1.0) || thresholds->lo > thresholds->hi) {
      throw ConfigError("thresholds must satisfy 0 <= lo <= hi <= 1 with hi > 0");
    }
  }
  try {
    noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

int check_allowance(int sample_size, double calibrated_noise) {
  if (sample_size < 0) throw std::invalid_argument("check_allowance: negative sample size");
  if (!(calibrated_noise >= 0.0 && calibrated_noise <= 1.0)) {
    throw std::invalid_argument("check_allowance: noise must lie in [0, 1]");
  }
  if (sample_size == 0 || calibrated_noise == 0.0) return 0;
  const double f_exp = calibrated_noise / 2.0;
  const double slack = 3.0 * std::sqrt(f_exp * (1.0 - f_exp) / sample_size);
  const double fraction = 1.5 * calibrated_noise + slack;
  const int allowed = static_cast<int>(std::floor(fraction * sample_size));
  return std::min(allowed, sample_size);
}

std::vector<int> identify_singlets(std::span<const qsim::PauliOp> claimed,
                                   std::span<const qsim::PauliOp> bob_record) {
  if (claimed.size() != bob_record.size()) {
    throw std::invalid_argument("identify_singlets: record lengths differ");
  }
  std::vector<int> out;
  for (std::size_t k = 0; k < claimed.size(); ++k) {
    if (claimed[k] == bob_record[k]) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::string to_string(Verdict::Outcome o) {
  switch (o) {
    case Verdict::Outcome::Bit0: return "bit0";
    case Verdict::Outcome::Bit1: return "bit1";
    case Verdict::Outcome::Abort: return "abort";
  }
  return "unknown";
}

std::string to_string(Verdict::AbortReason r) {
  switch (r) {
    case Verdict::AbortReason::None: return "none";
    case Verdict::AbortReason::SourceRejected: return "source_rejected";
    case Verdict::AbortReason::EntanglementRejected: return "entanglement_rejected";
    case Verdict::AbortReason::EmptySingletSet: return "empty_singlet_set";
    case Verdict::AbortReason::ThresholdFail: return "threshold_fail";
    case Verdict::AbortReason::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

namespace {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Created: return "created";
    case Phase::Initialized: return "initialized";
    case Phase::SourceChecked: return "source_checked";
    case Phase::Transmitted: return "transmitted";
    case Phase::EntanglementChecked: return "entanglement_checked";
    case Phase::BobScrambled: return "bob_scrambled";
    case Phase::Committed: return "committed";
    case Phase::Verified: return "verified";
    case Phase::Aborted: return "aborted";
  }
  return "unknown";
}

}  // namespace

Session::Session(ProtocolConfig cfg, RunOptions opts)
    : cfg_(std::move(cfg)), opts_(opts), rng_(make_rng(cfg_.seed)) {
  cfg_.validate();
}

void Session::require_phase(Phase expected, const char* op) const {
  if (phase_ != expected) {
    throw PhaseError(std::string(op) + ": expected phase " + phase_name(expected) + ", session is " +
                     phase_name(phase_));
  }
}

void Session::fail(Verdict::AbortReason reason) {
  abort_reason_ = reason;
  phase_ = Phase::Aborted;
  if (!has_verdict_) {
    verdict_ = Verdict{};
    verdict_.outcome = Verdict::Outcome::Abort;
    verdict_.reason = reason;
    has_verdict_ = true;
  }
  Fnv1a h;
  h.str("abort").str(to_string(reason));
  note("abort", "session", h.value());
}

void Session::note(const std::string& phase, const std::string& sender, std::uint64_t digest) {
  Fnv1a h;
  h.u64(digest);
  transcript_.push_back({phase, sender, h.hex()});
}

int Session::remaining_pairs() const {
  int n = 0;
  for (const auto& slot : reg_) {
    if (!slot.consumed) ++n;
  }
  return n;
}

int Session::committed_size() const {
  if (phase_ != Phase::BobScrambled && phase_ != Phase::Committed && phase_ != Phase::Verified) {
    throw PhaseError("committed_size: register not renumbered yet");
  }
  return static_cast<int>(reg_.size());
}

const CommitmentRecord& Session::record() const {
  if (!has_record_) throw PhaseError("record: nothing committed yet");
  return record_;
}

const std::vector<int>& Session::revealed() const { return record().revealed; }

const Verdict& Session::verdict() const {
  if (!has_verdict_) throw PhaseError("verdict: not verified yet");
  return verdict_;
}

void Session::init() {
  require_phase(Phase::Created, "init");
  reg_.assign(static_cast<std::size_t>(cfg_.total_pairs), PairSlot{});
  const qsim::PairState fresh =
      opts_.product_source
          ? qsim::product_state(qsim::Outcome::Up, qsim::axis_z(), qsim::Outcome::Down,
                                qsim::axis_z())
          : qsim::bell_state(qsim::BellKind::PsiMinus);
  for (auto& slot : reg_) {
    qsim::PairState s = fresh;
    if (cfg_.noise.env_a > 0.0) s = qsim::depolarize(s, qsim::Side::Alice, cfg_.noise.env_a);
    if (cfg_.noise.env_b > 0.0) s = qsim::depolarize(s, qsim::Side::Bob, cfg_.noise.env_b);
    slot.state = s;
  }
  phase_ = Phase::Initialized;
  Fnv1a h;
  h.str("init").i64(cfg_.total_pairs).f64(cfg_.noise.env_a).f64(cfg_.noise.env_b);
  h.u64(opts_.product_source ? 1 : 0);
  note("init", "source", h.value());
}

std::vector<int> Session::sample_unconsumed(int count) {
  std::vector<int> pool;
  pool.reserve(reg_.size());
  for (std::size_t i = 0; i < reg_.size(); ++i) {
    if (!reg_[i].consumed) pool.push_back(static_cast<int>(i));
  }
  if (count > static_cast<int>(pool.size())) {
    throw PhaseError("sample_unconsumed: not enough unconsumed pairs");
  }
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<int>(bounded(rng_, pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

CheckResult Session::run_check(int sample_size, double calibrated_noise,
                               bool alice_honest_unscramble, bool unscramble_first,
                               Verdict::AbortReason on_fail, const char* phase_tag,
                               const char* sender) {
  CheckResult result;
  result.checked = sample_size;
  result.allowed = check_allowance(sample_size, calibrated_noise);
  const std::vector<int> picks = sample_unconsumed(sample_size);
  for (int idx : picks) {
    auto& slot = reg_[static_cast<std::size_t>(idx)];
    if (unscramble_first) {
      const qsim::PauliOp undo =
          alice_honest_unscramble ? slot.alice_pauli : qsim::random_pauli(rng_);
      slot.state = qsim::apply_pauli(slot.state, qsim::Side::Alice, undo);
    }
    const qsim::Axis axis = cfg_.axis_policy.draw(rng_);
    auto [a, mid] = qsim::measure_spin(slot.state, qsim::Side::Alice, axis, rng_);
    auto [b, done] = qsim::measure_spin(mid, qsim::Side::Bob, axis, rng_);
    slot.state = done;
    slot.consumed = true;
    if (a == b) ++result.failures;
  }
  result.passed = result.failures <= result.allowed;
  Fnv1a h;
  h.str(phase_tag).i64(result.checked).i64(result.failures).i64(result.allowed);
  h.u64(result.passed ? 1 : 0);
  note(phase_tag, sender, h.value());
  if (!result.passed) fail(on_fail);
  return result;
}

CheckResult Session::source_check() {
  require_phase(Phase::Initialized, "source_check");
  if (opts_.alice_fakes_source_check) {
    CheckResult result;
    result.checked = cfg_.alice_check_pairs;
    result.allowed = check_allowance(cfg_.alice_check_pairs,
                                     qct::noise::compose2(cfg_.noise.env_a, cfg_.noise.env_b));
    for (int idx : sample_unconsumed(cfg_.alice_check_pairs)) {
      reg_[static_cast<std::size_t>(idx)].consumed = true;
    }
    result.passed = true;
    Fnv1a h;
    h.str("source_check").i64(result.checked).i64(result.failures).i64(result.allowed).u64(1);
    note("source_check", "alice", h.value());
    phase_ = Phase::SourceChecked;
    return result;
  }
  const CheckResult result =
      run_check(cfg_.alice_check_pairs, qct::noise::compose2(cfg_.noise.env_a, cfg_.noise.env_b),
                true, false, Verdict::AbortReason::SourceRejected, "source_check", "alice");
  if (result.passed) phase_ = Phase::SourceChecked;
  return result;
}

void Session::alice_scramble() {
  require_phase(Phase::SourceChecked, "alice_scramble");
  double self = cfg_.noise.self_a;
  if (opts_.detector_cheater == qsim::Side::Alice) {
    self *= 1.0 - cfg_.noise.detector_advantage;
  }
  for (auto& slot : reg_) {
    if (slot.consumed) continue;
    if (opts_.alice_scrambles) {
      slot.alice_pauli = qsim::random_pauli(rng_);
      slot.state = qsim::apply_pauli(slot.state, qsim::Side::Alice, slot.alice_pauli);
    }
    if (self > 0.0) slot.state = qsim::depolarize(slot.state, qsim::Side::Alice, self);
  }
  phase_ = Phase::Transmitted;
  Fnv1a h;
  h.str("transmit").i64(remaining_pairs());
  note("transmit", "alice", h.value());
}

CheckResult Session::entanglement_check(bool alice_honest_unscramble) {
  require_phase(Phase::Transmitted, "entanglement_check");
  const double levels[] = {cfg_.noise.env_a, cfg_.noise.env_b, cfg_.noise.self_a};
  const CheckResult result =
      run_check(cfg_.bob_check_pairs, qct::noise::compose(levels), alice_honest_unscramble, true,
                Verdict::AbortReason::EntanglementRejected, "entanglement_check", "bob");
  if (result.passed) phase_ = Phase::EntanglementChecked;
  return result;
}

void Session::bob_scramble() {
  require_phase(Phase::EntanglementChecked, "bob_scramble");
  double self = cfg_.noise.self_b;
  if (opts_.detector_cheater == qsim::Side::Bob) {
    self *= 1.0 - cfg_.noise.detector_advantage;
  }
  for (auto& slot : reg_) {
    if (slot.consumed) continue;
    if (opts_.bob_scrambles) {
      slot.bob_pauli = qsim::random_pauli(rng_);
      slot.state = qsim::apply_pauli(slot.state, qsim::Side::Bob, slot.bob_pauli);
    }
    if (self > 0.0) slot.state = qsim::depolarize(slot.state, qsim::Side::Bob, self);
  }
  std::erase_if(reg_, [](const PairSlot& s) { return s.consumed; });
  if (static_cast<int>(reg_.size()) != cfg_.committed_pairs()) {
    throw PhaseError("bob_scramble: unexpected surviving pair count");
  }
  phase_ = Phase::BobScrambled;
  Fnv1a h;
  h.str("bob_scramble").i64(static_cast<std::int64_t>(reg_.size()));
  note("bob_scramble", "bob", h.value());
}

const CommitmentRecord& Session::commit(int bit) {
  require_phase(Phase::BobScrambled, "commit");
  if (bit != 0 && bit != 1) throw std::invalid_argument("commit: bit must be 0 or 1");
  const int n = static_cast<int>(reg_.size());
  record_ = CommitmentRecord{};
  record_.bit = bit;
  record_.axes.reserve(static_cast<std::size_t>(n));
  record_.outcomes.reserve(static_cast<std::size_t>(n));
  for (auto& slot : reg_) {
    const qsim::Axis axis = qsim::random_xz(rng_);
    auto [outcome, post] = qsim::measure_spin(slot.state, qsim::Side::Alice, axis, rng_);
    slot.state = post;
    slot.alice_axis = axis;
    slot.alice_outcome = outcome;
    record_.axes.push_back(axis);
    record_.outcomes.push_back(outcome);
  }
  record_.revealed.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int src = bit == 0 ? k : n - 1 - k;
    record_.revealed[static_cast<std::size_t>(k)] =
        qsim::symbol(record_.outcomes[static_cast<std::size_t>(src)]);
  }
  has_record_ = true;
  phase_ = Phase::Committed;
  Fnv1a h;
  h.str("commit");
  for (int r : record_.revealed) h.i64(r);
  note("commit", "alice", h.value());
  return record_;
}

Disclosure Session::honest_disclosure() const {
  if (!has_record_) throw PhaseError("honest_disclosure: nothing committed yet");
  Disclosure d;
  d.claimed_bit = record_.bit;
  d.claimed_axes = record_.axes;
  d.claimed_paulis.reserve(reg_.size());
  for (const auto& slot : reg_) d.claimed_paulis.push_back(slot.alice_pauli);
  return d;
}

Verdict Session::verify(const Disclosure& disclosure) {
  require_phase(Phase::Committed, "verify");
  const int n = static_cast<int>(reg_.size());
  if (static_cast<int>(disclosure.claimed_paulis.size()) != n ||
      static_cast<int>(disclosure.claimed_axes.size()) != n) {
    throw std::invalid_argument("verify: disclosure length mismatch");
  }
  if (disclosure.claimed_bit != 0 && disclosure.claimed_bit != 1) {
    throw std::invalid_argument("verify: claimed bit must be 0 or 1");
  }
  std::vector<qsim::PauliOp> bob_record;
  bob_record.reserve(reg_.size());
  for (const auto& slot : reg_) bob_record.push_back(slot.bob_pauli);
  const std::vector<int> singlets = identify_singlets(disclosure.claimed_paulis, bob_record);

  verdict_ = Verdict{};
  verdict_.singlet_count = static_cast<int>(singlets.size());
  if (singlets.empty()) {
    verdict_.outcome = Verdict::Outcome::Abort;
    verdict_.reason = Verdict::AbortReason::EmptySingletSet;
    has_verdict_ = true;
    Fnv1a h;
    h.str("verify").str(to_string(verdict_.reason));
    note("verify", "bob", h.value());
    phase_ = Phase::Aborted;
    abort_reason_ = verdict_.reason;
    return verdict_;
  }

  int direct_hits = 0;
  int reverse_hits = 0;
  for (int k : singlets) {
    auto& slot = reg_[static_cast<std::size_t>(k)];
    auto [outcome, post] =
        qsim::measure_spin(slot.state, qsim::Side::Bob,
                           disclosure.claimed_axes[static_cast<std::size_t>(k)], rng_);
    slot.state = post;
    const int s = qsim::symbol(outcome);
    if (s != record_.revealed[static_cast<std::size_t>(k)]) ++direct_hits;
    if (s != record_.revealed[static_cast<std::size_t>(n - 1 - k)]) ++reverse_hits;
  }
  const auto m = static_cast<double>(singlets.size());
  verdict_.f_direct = direct_hits / m;
  verdict_.f_reverse = reverse_hits / m;

  const Thresholds thr = cfg_.effective_thresholds();
  const double f_claimed = disclosure.claimed_bit == 0 ? verdict_.f_direct : verdict_.f_reverse;
  const double f_other = disclosure.claimed_bit == 0 ? verdict_.f_reverse : verdict_.f_direct;
  const auto claimed_outcome =
      disclosure.claimed_bit == 0 ? Verdict::Outcome::Bit0 : Verdict::Outcome::Bit1;
  if (cfg_.verdict_mode == VerdictMode::ClaimedOrder) {
    if (f_claimed >= thr.hi) {
      verdict_.outcome = claimed_outcome;
      verdict_.reason = Verdict::AbortReason::None;
    } else {
      verdict_.outcome = Verdict::Outcome::Abort;
      verdict_.reason = Verdict::AbortReason::ThresholdFail;
    }
  } else {
    if (f_claimed >= thr.hi && f_other <= thr.lo) {
      verdict_.outcome = claimed_outcome;
      verdict_.reason = Verdict::AbortReason::None;
    } else if (f_claimed >= thr.hi) {
      verdict_.outcome = Verdict::Outcome::Abort;
      verdict_.reason = Verdict::AbortReason::Ambiguous;
    } else {
      verdict_.outcome = Verdict::Outcome::Abort;
      verdict_.reason = Verdict::AbortReason::ThresholdFail;
    }
  }
  has_verdict_ = true;
  Fnv1a h;
  h.str("verify").str(to_string(verdict_.outcome)).str(to_string(verdict_.reason));
  h.f64(verdict_.f_direct).f64(verdict_.f_reverse).i64(verdict_.singlet_count);
  note("verify", "bob", h.value());
  if (verdict_.aborted()) {
    phase_ = Phase::Aborted;
    abort_reason_ = verdict_.reason;
  } else {
    phase_ = Phase::Verified;
  }
  return verdict_;
}

// --- restricted views ---------------------------------------------------

Session::BobView Session::bob_view() {
  require_phase(Phase::Committed, "bob_view");
  return BobView(*this);
}

Session::AliceView Session::alice_view() {
  require_phase(Phase::Committed, "alice_view");
  return AliceView(*this);
}

int Session::BobView::size() const { return static_cast<int>(s_->reg_.size()); }

const std::vector<int>& Session::BobView::revealed() const { return s_->record_.revealed; }

qsim::PauliOp Session::BobView::own_pauli(int k) const {
  return s_->reg_.at(static_cast<std::size_t>(k)).bob_pauli;
}

bool Session::BobView::own_scramble_applied() const { return s_->opts_.bob_scrambles; }

qsim::Outcome Session::BobView::measure_own(int k, const qsim::Axis& axis, Rng& rng) {
  auto& slot = s_->reg_.at(static_cast<std::size_t>(k));
  auto [outcome, post] = qsim::measure_spin(slot.state, qsim::Side::Bob, axis, rng);
  slot.state = post;
  return outcome;
}

int Session::AliceView::size() const { return static_cast<int>(s_->reg_.size()); }

qsim::PauliOp Session::AliceView::own_pauli(int k) const {
  return s_->reg_.at(static_cast<std::size_t>(k)).alice_pauli;
}

const qsim::Axis& Session::AliceView::axis(int k) const {
  return s_->record_.axes.at(static_cast<std::size_t>(k));
}

qsim::Outcome Session::AliceView::outcome(int k) const {
  return s_->record_.outcomes.at(static_cast<std::size_t>(k));
}

int Session::AliceView::committed_bit() const { return s_->record_.bit; }

const std::vector<int>& Session::AliceView::revealed() const { return s_->record_.revealed; }

// --- drivers ------------------------------------------------------------

RunResult run_honest(const ProtocolConfig& cfg, int bit, RunOptions opts) {
  Session s(cfg, opts);
  RunResult out;
  s.init();
  out.source = s.source_check();
  if (!out.source.passed) {
    out.verdict = s.verdict();
    out.transcript = s.transcript();
    return out;
  }
  s.alice_scramble();
  out.entanglement = s.entanglement_check();
  if (!out.entanglement.passed) {
    out.verdict = s.verdict();
    out.transcript = s.transcript();
    return out;
  }
  s.bob_scramble();
  out.committed_bit = bit;
  out.committed_size = s.committed_size();
  s.commit(bit);
  out.verdict = s.verify(s.honest_disclosure());
  out.transcript = s.transcript();
  return out;
}

CoinOutcome coin_toss(const ProtocolConfig& cfg, const RunOptions& opts,
                      const CoinStrategies& strategies, std::uint64_t seed) {
  ProtocolConfig local = cfg;
  local.seed = seed;
  Session s(local, opts);
  CoinOutcome out;
  s.init();
  out.source = s.source_check();
  if (!out.source.passed) {
    out.verdict = s.verdict();
    return out;
  }
  s.alice_scramble();
  out.entanglement = s.entanglement_check();
  if (!out.entanglement.passed) {
    out.verdict = s.verdict();
    return out;
  }
  s.bob_scramble();
  out.checks_completed = true;

  const int bit = strategies.choose_bit ? strategies.choose_bit(s.rng()) : (coin(s.rng()) ? 1 : 0);
  s.commit(bit);
  out.committed_bit = bit;
  out.guess = strategies.guess ? strategies.guess(s, s.rng()) : (coin(s.rng()) ? 1 : 0);
  const Disclosure disclosure =
      strategies.disclose ? strategies.disclose(s, out.guess, s.rng()) : s.honest_disclosure();
  out.claimed_bit = disclosure.claimed_bit;
  out.verdict = s.verify(disclosure);
  if (out.verdict.aborted()) {
    out.result = CoinOutcome::Result::Abort;
  } else {
    out.result = out.verdict.is_bit(out.guess) ? CoinOutcome::Result::One : CoinOutcome::Result::Zero;
  }
  return out;
}

}  // namespace qct::protocol
