// Noise budget bookkeeping, channel calibration, and recovery confidence.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qct/qsim.hpp"

namespace qct::noise {

// Depolarizing probabilities for one session. env_* model the channel /
// storage noise present in every shared pair from the start; self_* are the
// levels each party deliberately injects on their own particles (Alice after
// her scramble, Bob after his). detector_advantage scales a cheating party's
// own self-injected level down by (1 - advantage): the part of their budget
// they attributed to detector noise never reaches the state. Environmental
// noise is never avoidable.
struct NoiseBudget {
  double env_a = 0.0;
  double env_b = 0.0;
  double self_a = 0.0;
  double self_b = 0.0;
  double detector_advantage = 0.0;

  void validate() const;  // throws std::invalid_argument out of [0,1]
};

// Total effective depolarizing weight of sequentially applied channels:
// 1 - prod(1 - p_i).
double compose(std::span<const double> levels);
double compose2(double p1, double p2);

struct CalibrationEntry {
  std::string label;
  double estimate = 0.0;   // p-hat = 2 * observed anti-correlation failure rate
  int samples = 0;
  double std_error = 0.0;  // 2 * binomial SE of the failure rate
};

struct CalibrationReport {
  std::vector<CalibrationEntry> entries;
};

// Measures `samples` pairs from `source` on both sides along a common random
// axis each and estimates the isotropic depolarizing level from the observed
// anti-correlation failure rate f via p = 2f. A noiseless singlet source
// yields exactly 0.
CalibrationEntry calibrate_environment(const std::function<qsim::PairState(Rng&)>& source,
                                       int samples, Rng& rng, std::string label = "env");

// Depolarize every state in place on the given side.
void depolarize_each(std::span<qsim::PairState> states, qsim::Side side, double level);

// P(X >= k) for X ~ Binomial(n, p).
double binomial_tail_geq(int n, double p, int k);

// Exact probability that an honest unveil passes the verdict rule when each
// committed-order comparison anti-correlates with probability 1 - p_total/2
// and each wrong-order comparison with probability 1/2, over `singlet_count`
// comparisons. `dual_order` adds the wrong-order <= theta_lo requirement.
// The f >= / <= comparisons replicate the verifier's floating-point semantics.
double recovery_confidence(int singlet_count, double p_total, double theta_hi, double theta_lo,
                           bool dual_order);

}  // namespace qct::noise
