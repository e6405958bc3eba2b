#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "qct/noise.hpp"
#include "qct/protocol.hpp"
#include "qct/qsim.hpp"
#include "qct/rng.hpp"

using namespace qct;
using qsim::BellKind;
using qsim::PairState;
using qsim::Side;

TEST_CASE("noise budget validation") {
  noise::NoiseBudget ok{0.1, 0.2, 0.0, 1.0, 0.5};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((noise::NoiseBudget{-0.1, 0, 0, 0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((noise::NoiseBudget{0, 1.1, 0, 0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((noise::NoiseBudget{0, 0, 2.0, 0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((noise::NoiseBudget{0, 0, 0, -1.0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((noise::NoiseBudget{0, 0, 0, 0, 1.5}.validate()), std::invalid_argument);
}

TEST_CASE("noise composition") {
  CHECK(noise::compose({}) == 0.0);
  CHECK(noise::compose2(0.0, 0.0) == 0.0);
  CHECK(noise::compose2(0.1, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(noise::compose2(0.1, 0.2) == doctest::Approx(0.28).epsilon(1e-15));
  CHECK(noise::compose2(1.0, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> abc = {0.05, 0.1, 0.25};
  const std::vector<double> cba = {0.25, 0.1, 0.05};
  CHECK(noise::compose(abc) == doctest::Approx(noise::compose(cba)).epsilon(1e-15));
  CHECK(noise::compose(abc) == doctest::Approx(1.0 - 0.95 * 0.9 * 0.75).epsilon(1e-15));
  CHECK_THROWS_AS(noise::compose2(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(noise::compose2(0.1, 1.5), std::invalid_argument);
}

TEST_CASE("depolarizing composition matches the channel algebra") {
  const PairState singlet = qsim::bell_state(BellKind::PsiMinus);
  for (double p1 : {0.0, 0.1, 0.4}) {
    for (double p2 : {0.0, 0.25, 0.9}) {
      const PairState twice =
          qsim::depolarize(qsim::depolarize(singlet, Side::Alice, p1), Side::Alice, p2);
      const PairState once = qsim::depolarize(singlet, Side::Alice, noise::compose2(p1, p2));
      CHECK(qsim::max_abs_diff(twice, once) < 1e-12);
    }
  }
}

TEST_CASE("double full suppression yields the maximally mixed state") {
  std::vector<PairState> reg;
  Rng rng = make_rng(31);
  for (int i = 0; i < 8; ++i) {
    PairState s = qsim::bell_state(BellKind::PsiMinus);
    s = qsim::apply_pauli(s, Side::Alice, qsim::random_pauli(rng));
    reg.push_back(s);
  }
  noise::depolarize_each(reg, Side::Alice, 1.0);
  noise::depolarize_each(reg, Side::Bob, 1.0);
  for (const auto& s : reg) {
    CHECK(qsim::max_abs_diff(s, qsim::maximally_mixed()) < 1e-12);
  }
  CHECK_THROWS_AS(noise::depolarize_each(reg, Side::Alice, 1.2), std::invalid_argument);
}

TEST_CASE("level zero injection is the identity") {
  std::vector<PairState> reg = {qsim::bell_state(BellKind::PhiPlus)};
  const PairState before = reg[0];
  noise::depolarize_each(reg, Side::Bob, 0.0);
  CHECK(qsim::max_abs_diff(reg[0], before) == 0.0);
}

TEST_CASE("calibration of a noiseless singlet source is exactly zero") {
  Rng rng = make_rng(7);
  auto source = [](Rng&) { return qsim::bell_state(BellKind::PsiMinus); };
  const auto entry = noise::calibrate_environment(source, 500, rng, "clean");
  CHECK(entry.estimate == 0.0);
  CHECK(entry.std_error == 0.0);
  CHECK(entry.samples == 500);
  CHECK(entry.label == "clean");
}

TEST_CASE("calibration recovers the injected level within three standard errors") {
  for (double p : {0.05, 0.1, 0.25}) {
    Rng rng = make_rng(101 + static_cast<std::uint64_t>(p * 1000));
    auto source = [p](Rng&) {
      return qsim::depolarize(qsim::bell_state(BellKind::PsiMinus), Side::Alice, p);
    };
    const auto entry = noise::calibrate_environment(source, 10000, rng);
    REQUIRE(entry.std_error > 0.0);
    CHECK(std::abs(entry.estimate - p) <= 3.0 * entry.std_error);
  }
}

TEST_CASE("calibration at level 0.1 over 1e4 samples lands within 0.01") {
  Rng rng = make_rng(2026);
  auto source = [](Rng&) {
    return qsim::depolarize(qsim::bell_state(BellKind::PsiMinus), Side::Alice, 0.1);
  };
  const auto entry = noise::calibrate_environment(source, 10000, rng);
  CHECK(std::abs(entry.estimate - 0.1) <= 0.01);
}

TEST_CASE("calibration needs a minimum sample size") {
  Rng rng = make_rng(1);
  auto source = [](Rng&) { return qsim::bell_state(BellKind::PsiMinus); };
  CHECK_THROWS_AS(noise::calibrate_environment(source, 99, rng), std::invalid_argument);
  CHECK_NOTHROW(noise::calibrate_environment(source, 100, rng));
}

TEST_CASE("binomial tail against the recurrence oracle") {
  for (int n : {10, 50, 200}) {
    for (double p : {0.05, 0.125, 0.5, 0.875}) {
      for (int k : {0, 1, n / 4, n / 2, n - 1, n, n + 1}) {
        const double got = noise::binomial_tail_geq(n, p, k);
        const double want = oracle::binomial_tail_geq(n, p, k);
        CHECK(std::abs(got - want) < 1e-12);
      }
    }
  }
  CHECK(noise::binomial_tail_geq(50, 0.0, 0) == 1.0);
  CHECK(noise::binomial_tail_geq(50, 0.0, 1) == 0.0);
  CHECK(noise::binomial_tail_geq(50, 1.0, 50) == 1.0);
  CHECK(noise::binomial_tail_geq(50, 0.5, 51) == 0.0);
  CHECK_THROWS_AS(noise::binomial_tail_geq(-1, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(noise::binomial_tail_geq(10, 1.5, 0), std::invalid_argument);
}

namespace {

// Independent route: oracle pmf + the verdict comparisons spelled out.
double oracle_recovery(int m, double p_total, double hi, double lo, bool dual) {
  const double q = 1.0 - p_total / 2.0;
  const std::vector<double> pmf_claim = oracle::binomial_pmf(m, q);
  const std::vector<double> pmf_fair = oracle::binomial_pmf(m, 0.5);
  double claim = 0.0;
  double wrong = 0.0;
  for (int c = 0; c <= m; ++c) {
    if (static_cast<double>(c) / m >= hi) claim += pmf_claim[c];
    if (static_cast<double>(c) / m <= lo) wrong += pmf_fair[c];
  }
  return dual ? claim * wrong : claim;
}

}  // namespace

TEST_CASE("recovery confidence matches the oracle and its stated bounds") {
  const auto thr = protocol::default_thresholds(0.25);
  CHECK(thr.hi == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(thr.lo == doctest::Approx(0.73).epsilon(1e-15));

  const double conf = noise::recovery_confidence(50, 0.25, thr.hi, thr.lo, true);
  CHECK(conf >= 0.99);
  CHECK(conf == doctest::Approx(oracle_recovery(50, 0.25, thr.hi, thr.lo, true)).epsilon(1e-12));

  for (int m : {1, 7, 50, 120}) {
    for (double p : {0.0, 0.1, 0.25, 0.5}) {
      for (bool dual : {false, true}) {
        const auto t = protocol::default_thresholds(p);
        const double got = noise::recovery_confidence(m, p, t.hi, t.lo, dual);
        const double want = oracle_recovery(m, p, t.hi, t.lo, dual);
        CHECK(std::abs(got - want) < 1e-12);
      }
    }
  }
}

TEST_CASE("recovery confidence at zero noise") {
  const auto thr = protocol::default_thresholds(0.0);
  CHECK(noise::recovery_confidence(50, 0.0, thr.hi, thr.lo, false) == 1.0);
  CHECK(noise::recovery_confidence(50, 0.0, thr.hi, thr.lo, true) >= 1.0 - 1e-6);
  CHECK(noise::recovery_confidence(1, 0.0, thr.hi, thr.lo, false) == 1.0);
}

TEST_CASE("recovery confidence is monotone nonincreasing in total noise") {
  const auto thr = protocol::default_thresholds(0.25);
  for (bool dual : {false, true}) {
    double prev = 2.0;
    for (int i = 0; i <= 24; ++i) {
      const double p = i * 0.025;
      const double conf = noise::recovery_confidence(50, p, thr.hi, thr.lo, dual);
      CHECK(conf <= prev + 1e-15);
      prev = conf;
    }
  }
}

TEST_CASE("recovery confidence input validation") {
  CHECK_THROWS_AS(noise::recovery_confidence(0, 0.1, 0.9, 0.84, true), std::invalid_argument);
  CHECK_THROWS_AS(noise::recovery_confidence(50, -0.1, 0.9, 0.84, true), std::invalid_argument);
  CHECK_THROWS_AS(noise::recovery_confidence(50, 1.1, 0.9, 0.84, true), std::invalid_argument);
}

TEST_CASE("recovery confidence agrees with synthetic verdict sampling") {
  for (double p : {0.1, 0.25}) {
    const auto thr = protocol::default_thresholds(p);
    const double q = 1.0 - p / 2.0;
    Rng rng = make_rng(555 + static_cast<std::uint64_t>(p * 100));
    const int runs = 1000;
    const int m = 50;
    int ok = 0;
    for (int r = 0; r < runs; ++r) {
      int claim = 0;
      int wrong = 0;
      for (int k = 0; k < m; ++k) {
        if (unit_real(rng) < q) ++claim;
        if (coin(rng)) ++wrong;
      }
      const bool pass = (static_cast<double>(claim) / m >= thr.hi) &&
                        (static_cast<double>(wrong) / m <= thr.lo);
      if (pass) ++ok;
    }
    const double conf = noise::recovery_confidence(m, p, thr.hi, thr.lo, true);
    const double sigma = std::sqrt(conf * (1.0 - conf) / runs);
    CHECK(std::abs(static_cast<double>(ok) / runs - conf) <= 3.0 * sigma + 1e-9);
  }
}
