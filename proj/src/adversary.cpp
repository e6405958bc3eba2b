#include "qct/adversary.hpp"

#include <cmath>
#include <thread>
#include <utility>
#include <vector>

namespace qct::adversary {

std::string to_string(AliceStrategy s) {
  switch (s) {
    case AliceStrategy::Honest: return "honest";
    case AliceStrategy::WrongDisclosure: return "wrong-disclosure";
    case AliceStrategy::ReversalNoSuppression: return "reversal";
    case AliceStrategy::ProductStateSource: return "product-source";
  }
  return "unknown";
}

std::string to_string(BobStrategy s) {
  switch (s) {
    case BobStrategy::HonestGuess: return "honest";
    case BobStrategy::EarlyMeasure: return "early-measure";
    case BobStrategy::NoSuppressEarlyMeasure: return "early-measure-unscrambled";
  }
  return "unknown";
}

std::string to_string(SuppressionMode m) {
  switch (m) {
    case SuppressionMode::Both: return "both";
    case SuppressionMode::AliceOnly: return "alice-only";
    case SuppressionMode::BobOnly: return "bob-only";
    case SuppressionMode::None: return "none";
  }
  return "unknown";
}

std::optional<AliceStrategy> parse_alice_strategy(const std::string& name) {
  if (name == "honest") return AliceStrategy::Honest;
  if (name == "wrong-disclosure") return AliceStrategy::WrongDisclosure;
  if (name == "reversal") return AliceStrategy::ReversalNoSuppression;
  if (name == "product-source") return AliceStrategy::ProductStateSource;
  return std::nullopt;
}

std::optional<BobStrategy> parse_bob_strategy(const std::string& name) {
  if (name == "honest") return BobStrategy::HonestGuess;
  if (name == "early-measure") return BobStrategy::EarlyMeasure;
  if (name == "early-measure-unscrambled") return BobStrategy::NoSuppressEarlyMeasure;
  return std::nullopt;
}

std::optional<SuppressionMode> parse_suppression(const std::string& name) {
  if (name == "both") return SuppressionMode::Both;
  if (name == "alice-only") return SuppressionMode::AliceOnly;
  if (name == "bob-only") return SuppressionMode::BobOnly;
  if (name == "none") return SuppressionMode::None;
  return std::nullopt;
}

bool alice_scrambles(SuppressionMode m) {
  return m == SuppressionMode::Both || m == SuppressionMode::AliceOnly;
}

bool bob_scrambles(SuppressionMode m) {
  return m == SuppressionMode::Both || m == SuppressionMode::BobOnly;
}

EarlyMeasureResult bob_early_measure(protocol::Session::BobView& view, Rng& rng) {
  EarlyMeasureResult res;
  const int n = view.size();
  res.pairs = n;
  const std::vector<int>& r = view.revealed();
  for (int k = 0; k < n; ++k) {
    const qsim::Axis axis = qsim::random_xz(rng);
    const int sym = qsim::symbol(view.measure_own(k, axis, rng));
    if (sym != r[static_cast<std::size_t>(k)]) ++res.direct_mismatches;
    if (sym != r[static_cast<std::size_t>(n - 1 - k)]) ++res.reverse_mismatches;
  }
  if (res.direct_mismatches != res.reverse_mismatches) {
    res.guessed_bit = res.direct_mismatches > res.reverse_mismatches ? 0 : 1;
  } else {
    res.guessed_bit = coin(rng) ? 1 : 0;
  }
  return res;
}

protocol::Disclosure alice_wrong_disclosure(const protocol::Session::AliceView& view,
                                            int target_bit, Rng& rng) {
  if (target_bit != 0 && target_bit != 1) {
    throw std::invalid_argument("alice_wrong_disclosure: bit must be 0 or 1");
  }
  const int n = view.size();
  protocol::Disclosure d;
  d.claimed_bit = target_bit;
  d.claimed_paulis.reserve(static_cast<std::size_t>(n));
  d.claimed_axes.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    d.claimed_paulis.push_back(qsim::random_pauli(rng));
    d.claimed_axes.push_back(view.axis(k));
  }
  return d;
}

namespace {

// Bob-side outcome sign relative to Alice's, for a pair that is (pauli x I) on
// a singlet, measured along a common X or Z axis: -1 = anti-correlated.
int correlation_sign(qsim::PauliOp pauli, bool axis_is_x) {
  switch (pauli) {
    case qsim::PauliOp::Id: return -1;
    case qsim::PauliOp::X: return axis_is_x ? -1 : +1;
    case qsim::PauliOp::Z: return axis_is_x ? +1 : -1;
    case qsim::PauliOp::Y: return +1;
  }
  return +1;
}

}  // namespace

std::optional<ReversalPlan> alice_reversal_no_suppression(
    const protocol::Session::AliceView& view, int target_bit, Rng& rng,
    AxisClaimPolicy axis_claims) {
  if (target_bit != 0 && target_bit != 1) {
    throw std::invalid_argument("alice_reversal_no_suppression: bit must be 0 or 1");
  }
  const int n = view.size();
  const std::vector<int>& r = view.revealed();
  ReversalPlan plan;
  plan.total = n;
  plan.disclosure.claimed_bit = target_bit;
  plan.disclosure.claimed_paulis.resize(static_cast<std::size_t>(n));
  plan.disclosure.claimed_axes.reserve(static_cast<std::size_t>(n));
  std::vector<bool> selected(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n; ++k) {
    const qsim::Axis true_axis = view.axis(k);
    const qsim::Axis claimed_axis =
        axis_claims == AxisClaimPolicy::KeepTrue ? true_axis : qsim::random_xz(rng);
    plan.disclosure.claimed_axes.push_back(claimed_axis);
    if (!qsim::same_axis(claimed_axis, true_axis)) continue;  // outcome unpredictable
    const bool axis_is_x = qsim::same_axis(claimed_axis, qsim::axis_x());
    const int sign = correlation_sign(view.own_pauli(k), axis_is_x);
    const qsim::Outcome predicted =
        sign < 0 ? qsim::flipped(view.outcome(k)) : view.outcome(k);
    const int cmp = target_bit == 0 ? k : n - 1 - k;
    if (qsim::symbol(predicted) != r[static_cast<std::size_t>(cmp)]) {
      selected[static_cast<std::size_t>(k)] = true;
      ++plan.selectable;
    }
  }
  if (plan.selectable < (n + 15) / 16) return std::nullopt;
  // Unselected positions get the claimed-axis pauli as a dummy: never Id, so
  // they stay out of the singlet set when Bob skipped his scramble. If Bob did
  // scramble, an accidental match leaves the correlation sign at Alice's
  // prediction (axis pauli commutes with the axis), so these positions dilute
  // the forged mismatch fraction instead of inflating it.
  for (int k = 0; k < n; ++k) {
    if (selected[static_cast<std::size_t>(k)]) {
      plan.disclosure.claimed_paulis[static_cast<std::size_t>(k)] = qsim::PauliOp::Id;
    } else {
      const bool axis_is_x = qsim::same_axis(plan.disclosure.claimed_axes[static_cast<std::size_t>(k)],
                                             qsim::axis_x());
      plan.disclosure.claimed_paulis[static_cast<std::size_t>(k)] =
          axis_is_x ? qsim::PauliOp::X : qsim::PauliOp::Z;
    }
  }
  return plan;
}

Interval proportion_ci(double successes, double trials) {
  Interval iv;
  if (trials <= 0.0) return iv;
  const double p = successes / trials;
  iv.center = p;
  iv.half_width = 1.96 * std::sqrt(p * (1.0 - p) / trials);
  return iv;
}

namespace {

struct RunTally {
  signed char result = -1;  // 0 zero, 1 one, 2 abort
  bool completed = false;
  bool guess_correct = false;
  bool attempt = false;
  bool success = false;
  bool fallback = false;
  double f_direct = 0.0;
  double f_reverse = 0.0;
  int singlets = 0;
  int em_pairs = 0;
  int em_direct = 0;
  int em_reverse = 0;
  int committed_bit = 0;
  double selectable_fraction = 0.0;
};

template <typename Fn>
void parallel_runs(int runs, int threads, Fn&& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > runs) workers = runs > 0 ? runs : 1;
  if (workers == 1) {
    for (int i = 0; i < runs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&body, w, workers, runs] {
      for (int i = w; i < runs; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

protocol::RunOptions options_for(const protocol::ProtocolConfig& cfg, AliceStrategy alice,
                                 BobStrategy bob, SuppressionMode mode) {
  protocol::RunOptions opts;
  opts.alice_scrambles = alice_scrambles(mode);
  opts.bob_scrambles = bob_scrambles(mode) && bob != BobStrategy::NoSuppressEarlyMeasure;
  if (alice == AliceStrategy::ProductStateSource) {
    opts.product_source = true;
    opts.alice_fakes_source_check = true;
  }
  // The detector-advantage budget belongs to whichever party is cheating.
  if (cfg.noise.detector_advantage > 0.0) {
    if (bob != BobStrategy::HonestGuess) {
      opts.detector_cheater = qsim::Side::Bob;
    } else if (alice != AliceStrategy::Honest) {
      opts.detector_cheater = qsim::Side::Alice;
    }
  }
  return opts;
}

}  // namespace

BiasReport estimate_bias(const protocol::ProtocolConfig& cfg, AliceStrategy alice,
                         BobStrategy bob, SuppressionMode suppression, int runs,
                         std::uint64_t seed, int threads) {
  if (runs < 0) throw std::invalid_argument("estimate_bias: runs must be nonnegative");
  const protocol::RunOptions opts = options_for(cfg, alice, bob, suppression);
  std::vector<RunTally> tallies(static_cast<std::size_t>(runs));

  parallel_runs(runs, threads, [&](int i) {
    RunTally& t = tallies[static_cast<std::size_t>(i)];
    protocol::CoinStrategies strat;
    if (bob != BobStrategy::HonestGuess) {
      strat.guess = [&t](protocol::Session& s, Rng& rng) {
        auto view = s.bob_view();
        const EarlyMeasureResult res = bob_early_measure(view, rng);
        t.em_pairs = res.pairs;
        t.em_direct = res.direct_mismatches;
        t.em_reverse = res.reverse_mismatches;
        return res.guessed_bit;
      };
    }
    if (alice == AliceStrategy::WrongDisclosure) {
      strat.disclose = [&t](protocol::Session& s, int guess, Rng& rng) {
        const auto view = s.alice_view();
        if (guess != view.committed_bit()) return s.honest_disclosure();
        t.attempt = true;
        return alice_wrong_disclosure(view, 1 - view.committed_bit(), rng);
      };
    } else if (alice == AliceStrategy::ReversalNoSuppression) {
      strat.disclose = [&t](protocol::Session& s, int guess, Rng& rng) {
        const auto view = s.alice_view();
        if (guess != view.committed_bit()) return s.honest_disclosure();
        auto plan = alice_reversal_no_suppression(view, 1 - view.committed_bit(), rng);
        if (!plan) {
          t.fallback = true;
          return s.honest_disclosure();
        }
        t.attempt = true;
        t.selectable_fraction = static_cast<double>(plan->selectable) / plan->total;
        return std::move(plan->disclosure);
      };
    }
    const protocol::CoinOutcome out = protocol::coin_toss(cfg, opts, strat, derive_seed(seed, i));
    t.completed = out.checks_completed;
    t.committed_bit = out.committed_bit;
    switch (out.result) {
      case protocol::CoinOutcome::Result::Zero: t.result = 0; break;
      case protocol::CoinOutcome::Result::One: t.result = 1; break;
      case protocol::CoinOutcome::Result::Abort: t.result = 2; break;
    }
    if (out.checks_completed) {
      t.guess_correct = out.guess == out.committed_bit;
      t.f_direct = out.verdict.f_direct;
      t.f_reverse = out.verdict.f_reverse;
      t.singlets = out.verdict.singlet_count;
      if (t.attempt && out.claimed_bit != out.committed_bit &&
          out.verdict.is_bit(out.claimed_bit)) {
        t.success = true;
      }
    }
  });

  BiasReport rep;
  rep.alice = alice;
  rep.bob = bob;
  rep.suppression = suppression;
  rep.runs = runs;
  double f_direct_sum = 0.0;
  double f_reverse_sum = 0.0;
  double singlet_sum = 0.0;
  int guesses = 0;
  for (const RunTally& t : tallies) {
    if (t.result == 0) ++rep.outcome_zero;
    if (t.result == 1) ++rep.outcome_one;
    if (t.result == 2) ++rep.aborts;
    if (t.attempt) ++rep.flip_attempts;
    if (t.success) ++rep.flip_successes;
    if (t.completed) {
      ++rep.verdict_runs;
      ++guesses;
      if (t.guess_correct) ++rep.guess_correct;
      f_direct_sum += t.f_direct;
      f_reverse_sum += t.f_reverse;
      singlet_sum += t.singlets;
      rep.em_pairs += t.em_pairs;
      rep.em_committed_mismatches += t.committed_bit == 0 ? t.em_direct : t.em_reverse;
    }
  }
  rep.completed = rep.outcome_one + rep.outcome_zero;
  if (runs > 0) {
    rep.p_alice_all = static_cast<double>(rep.outcome_zero) / runs;
    rep.p_bob_all = static_cast<double>(rep.outcome_one) / runs;
    rep.abort_rate = static_cast<double>(rep.aborts) / runs;
    rep.eps_alice_all = proportion_ci(rep.outcome_zero, runs);
    rep.eps_alice_all.center -= 0.5;
    rep.eps_bob_all = proportion_ci(rep.outcome_one, runs);
    rep.eps_bob_all.center -= 0.5;
  }
  if (rep.completed > 0) {
    rep.p_alice_completed = static_cast<double>(rep.outcome_zero) / rep.completed;
    rep.p_bob_completed = static_cast<double>(rep.outcome_one) / rep.completed;
    rep.eps_alice_completed = proportion_ci(rep.outcome_zero, rep.completed);
    rep.eps_alice_completed.center -= 0.5;
    rep.eps_bob_completed = proportion_ci(rep.outcome_one, rep.completed);
    rep.eps_bob_completed.center -= 0.5;
  }
  if (guesses > 0) rep.guess_accuracy = static_cast<double>(rep.guess_correct) / guesses;
  if (rep.verdict_runs > 0) {
    rep.mean_f_direct = f_direct_sum / rep.verdict_runs;
    rep.mean_f_reverse = f_reverse_sum / rep.verdict_runs;
    rep.mean_singlets = singlet_sum / rep.verdict_runs;
  }
  if (rep.em_pairs > 0) {
    rep.em_anticorrelation =
        static_cast<double>(rep.em_committed_mismatches) / static_cast<double>(rep.em_pairs);
  }
  return rep;
}

ForgeryReport run_forgery_trials(const protocol::ProtocolConfig& cfg, AliceStrategy alice,
                                 SuppressionMode suppression, int runs, std::uint64_t seed,
                                 int threads, AxisClaimPolicy axis_claims) {
  if (runs < 0) throw std::invalid_argument("run_forgery_trials: runs must be nonnegative");
  const protocol::RunOptions opts = options_for(cfg, alice, BobStrategy::HonestGuess, suppression);
  std::vector<RunTally> tallies(static_cast<std::size_t>(runs));

  parallel_runs(runs, threads, [&](int i) {
    RunTally& t = tallies[static_cast<std::size_t>(i)];
    protocol::ProtocolConfig local = cfg;
    local.seed = derive_seed(seed, i);
    protocol::Session s(local, opts);
    s.init();
    if (!s.source_check().passed) {
      t.result = 2;
      return;
    }
    s.alice_scramble();
    if (!s.entanglement_check().passed) {
      t.result = 2;
      return;
    }
    s.bob_scramble();
    const int bit = coin(s.rng()) ? 1 : 0;
    s.commit(bit);
    const int target = 1 - bit;
    protocol::Disclosure disclosure;
    switch (alice) {
      case AliceStrategy::WrongDisclosure:
        disclosure = alice_wrong_disclosure(s.alice_view(), target, s.rng());
        t.attempt = true;
        break;
      case AliceStrategy::ReversalNoSuppression: {
        auto plan = alice_reversal_no_suppression(s.alice_view(), target, s.rng(), axis_claims);
        if (plan) {
          disclosure = std::move(plan->disclosure);
          t.attempt = true;
          t.selectable_fraction = static_cast<double>(plan->selectable) / plan->total;
        } else {
          disclosure = s.honest_disclosure();
          t.fallback = true;
        }
        break;
      }
      default:
        disclosure = s.honest_disclosure();
        break;
    }
    const protocol::Verdict v = s.verify(disclosure);
    if (v.aborted()) {
      t.result = 2;
    } else {
      t.result = 1;
      if (t.attempt && v.is_bit(target)) t.success = true;
    }
  });

  ForgeryReport rep;
  rep.runs = runs;
  double selectable_sum = 0.0;
  for (const RunTally& t : tallies) {
    if (t.attempt) {
      ++rep.attempts;
      selectable_sum += t.selectable_fraction;
    }
    if (t.success) ++rep.successes;
    if (t.result == 2) ++rep.aborts;
    if (t.fallback) ++rep.honest_fallbacks;
  }
  if (runs > 0) {
    rep.success_rate = static_cast<double>(rep.successes) / runs;
    rep.abort_rate = static_cast<double>(rep.aborts) / runs;
  }
  if (rep.attempts > 0) rep.mean_selectable_fraction = selectable_sum / rep.attempts;
  return rep;
}

}  // namespace qct::adversary
