#include "qct/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qct::noise {

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

void NoiseBudget::validate() const {
  require_unit(env_a, "env_a");
  require_unit(env_b, "env_b");
  require_unit(self_a, "self_a");
  require_unit(self_b, "self_b");
  require_unit(detector_advantage, "detector_advantage");
}

double compose(std::span<const double> levels) {
  double survive = 1.0;
  for (double p : levels) {
    require_unit(p, "noise level");
    survive *= 1.0 - p;
  }
  return 1.0 - survive;
}

double compose2(double p1, double p2) {
  const double levels[] = {p1, p2};
  return compose(levels);
}

CalibrationEntry calibrate_environment(const std::function<qsim::PairState(Rng&)>& source,
                                       int samples, Rng& rng, std::string label) {
  if (samples < 100) {
    throw std::invalid_argument("calibrate_environment: samples must be >= 100");
  }
  int failures = 0;
  for (int i = 0; i < samples; ++i) {
    qsim::PairState state = source(rng);
    const qsim::Axis axis = qsim::random_axis(rng);
    auto [a, after_a] = qsim::measure_spin(state, qsim::Side::Alice, axis, rng);
    const qsim::Outcome b = qsim::measure_spin(after_a, qsim::Side::Bob, axis, rng).first;
    if (a == b) ++failures;  // anti-correlation violated
  }
  const double f = static_cast<double>(failures) / samples;
  CalibrationEntry entry;
  entry.label = std::move(label);
  entry.estimate = std::min(1.0, 2.0 * f);
  entry.samples = samples;
  entry.std_error = 2.0 * std::sqrt(f * (1.0 - f) / samples);
  return entry;
}

void depolarize_each(std::span<qsim::PairState> states, qsim::Side side, double level) {
  require_unit(level, "level");
  if (level == 0.0) return;
  for (auto& s : states) s = qsim::depolarize(s, side, level);
}

double binomial_tail_geq(int n, double p, int k) {
  if (n < 0) throw std::invalid_argument("binomial_tail_geq: n must be >= 0");
  require_unit(p, "p");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_fact_n = std::lgamma(n + 1.0);
  double tail = 0.0;
  for (int j = k; j <= n; ++j) {
    const double log_pmf = log_fact_n - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                           j * log_p + (n - j) * log_q;
    tail += std::exp(log_pmf);
  }
  return std::min(1.0, tail);
}

double recovery_confidence(int singlet_count, double p_total, double theta_hi, double theta_lo,
                           bool dual_order) {
  if (singlet_count < 1) {
    throw std::invalid_argument("recovery_confidence: singlet_count must be >= 1");
  }
  require_unit(p_total, "p_total");
  const int m = singlet_count;
  const double log_fact_m = std::lgamma(m + 1.0);
  auto binom_pmf = [&](double p, int c) {
    if (p == 0.0) return c == 0 ? 1.0 : 0.0;
    if (p == 1.0) return c == m ? 1.0 : 0.0;
    const double log_pmf = log_fact_m - std::lgamma(c + 1.0) - std::lgamma(m - c + 1.0) +
                           c * std::log(p) + (m - c) * std::log1p(-p);
    return std::exp(log_pmf);
  };

  // Claimed order: each comparison anti-correlates with prob 1 - p/2; pass
  // when the observed fraction meets theta_hi under the verifier's own
  // floating-point comparison.
  const double q_claim = 1.0 - p_total / 2.0;
  double p_claim_pass = 0.0;
  for (int c = 0; c <= m; ++c) {
    if (static_cast<double>(c) / m >= theta_hi) p_claim_pass += binom_pmf(q_claim, c);
  }
  if (!dual_order) return std::min(1.0, p_claim_pass);

  // Wrong order: fair-coin comparisons, must stay at or below theta_lo.
  double p_wrong_ok = 0.0;
  for (int c = 0; c <= m; ++c) {
    if (static_cast<double>(c) / m <= theta_lo) p_wrong_ok += binom_pmf(0.5, c);
  }
  return std::min(1.0, p_claim_pass * p_wrong_ok);
}

}  // namespace qct::noise
