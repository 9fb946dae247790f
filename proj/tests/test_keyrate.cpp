#include <gtest/gtest.h>

#include <cmath>

#include "decoyqkd/calibrate.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/sim.hpp"
#include "decoyqkd/stats.hpp"

using namespace decoyqkd;
using namespace decoyqkd::keyrate;

namespace {

KeyBudget typical_budget() {
  KeyBudget k;
  k.n_sifted = 100'000;
  k.qber = 0.02;
  k.zero_fraction = 0.49;
  k.y1_lower = 0.9;
  k.b1_upper = 0.04;
  k.mu = 0.5;
  k.signal_gain = 0.5;
  k.f_ec = 1.1;
  k.f_pa = 1.1;
  k.f_ds = 1.05;
  return k;
}

}  // namespace

TEST(SecretLength, NoSinglePhotonCreditGivesZero) {
  auto k = typical_budget();
  k.y1_lower = 0.0;
  EXPECT_EQ(evaluate(k), 0);
  EXPECT_EQ(k.reason, "no single-photon credit");
}

TEST(SecretLength, IdealInputsKeepHalf) {
  KeyBudget k;
  k.n_sifted = 1'000'000;
  k.qber = 0.0;
  k.b1_upper = 0.0;
  k.zero_fraction = 0.5;
  k.mu = 1.0;
  k.y1_lower = 0.5 * std::exp(1.0);
  k.signal_gain = 1.0;
  EXPECT_EQ(evaluate(k), 500'000);
  EXPECT_DOUBLE_EQ(k.single_photon_fraction, 0.5);
  EXPECT_EQ(k.reason, "ok");
}

TEST(SecretLength, NegativeBracketGivesZeroWithReason) {
  auto k = typical_budget();
  k.qber = 0.2;
  EXPECT_EQ(evaluate(k), 0);
  EXPECT_LT(k.bracket, 0.0);
  EXPECT_EQ(k.reason, "non-positive bracket");
}

TEST(SecretLength, RejectsEfficienciesBelowOne) {
  auto k = typical_budget();
  k.f_ec = 0.99;
  EXPECT_THROW(evaluate(k), std::invalid_argument);
}

TEST(SecretLength, NeverExceedsSifted) {
  auto k = typical_budget();
  k.signal_gain = 1e-9;
  k.qber = 0.0;
  k.b1_upper = 0.0;
  k.zero_fraction = 0.5;
  EXPECT_LE(evaluate(k), k.n_sifted);
}

TEST(SecretLength, MonotoneInEveryInput) {
  const auto base = typical_budget();
  const Count n0 = secret_length(base);
  ASSERT_GT(n0, 0);
  auto moved = [&](auto f) {
    auto k = base;
    f(k);
    return secret_length(k);
  };
  for (double d : {0.001, 0.01, 0.05}) {
    EXPECT_LE(moved([&](KeyBudget& k) { k.qber += d; }), n0);
    EXPECT_LE(moved([&](KeyBudget& k) { k.b1_upper += d; }), n0);
    EXPECT_LE(moved([&](KeyBudget& k) { k.f_ec += d; }), n0);
    EXPECT_LE(moved([&](KeyBudget& k) { k.f_pa += d; }), n0);
    EXPECT_LE(moved([&](KeyBudget& k) { k.f_ds += d; }), n0);
    EXPECT_GE(moved([&](KeyBudget& k) { k.y1_lower += d; }), n0);
    EXPECT_GE(moved([&](KeyBudget& k) { k.zero_fraction += std::min(d, 0.01); }), n0);
  }
}

TEST(PrivacyAmplification, MatchesExactCombinatorialSum) {
  const auto r = privacy_amplification(100, 0.05, 1e-7);
  EXPECT_EQ(r.threshold, 20);
  EXPECT_NEAR(r.f_pa, 2.4183520350513993, 1e-12);
}

TEST(PrivacyAmplification, ZeroErrorRateNeedsNoPenalty) {
  EXPECT_EQ(privacy_amplification_factor(1000, 0.0, 1e-7), 1.0);
}

TEST(PrivacyAmplification, ApproachesOneForLargeBlocks) {
  const double f = privacy_amplification_factor(10'000'000, 0.05, 1e-7);
  EXPECT_GT(f, 1.0);
  EXPECT_LT(f, 1.05);
}

TEST(PrivacyAmplification, NonIncreasingInBlockLengthAndAtLeastOne) {
  for (double b : {0.01, 0.03, 0.1, 0.3}) {
    double prev = INFINITY;
    for (Count n = 10; n <= 100'000'000; n *= 10) {
      const double f = privacy_amplification_factor(n, b, 1e-7);
      EXPECT_GE(f, 1.0);
      EXPECT_LE(f, prev + 1e-12) << "n1 " << n << " b1 " << b;
      prev = f;
    }
  }
}

TEST(PrivacyAmplification, RejectsBadArguments) {
  EXPECT_THROW(privacy_amplification(0, 0.1, 1e-7), std::invalid_argument);
  EXPECT_THROW(privacy_amplification(10, 0.6, 1e-7), std::invalid_argument);
  EXPECT_THROW(privacy_amplification(10, 0.1, 0.0), std::invalid_argument);
}

TEST(ComposeSession, SymmetricBasesGiveEqualBudgets) {
  auto model = sim::reference_model();
  model.fiber_length_km = 50.0;
  model.intrinsic_error = 0.01;
  const auto scheme = sim::reference_scheme();
  const auto key = compose_session(sim::expected_tally(model, scheme, 1e9), scheme, ConfidenceConfig{});
  EXPECT_EQ(key.tight[0].n_secret, key.tight[1].n_secret);
  EXPECT_EQ(key.worst[0].n_secret, key.worst[1].n_secret);
  EXPECT_GT(key.total_tight, 0);
  EXPECT_EQ(key.total_tight, key.tight[0].n_secret + key.tight[1].n_secret);
}

TEST(ComposeSession, ErroneousBasisStarvesItselfAndItsConjugate) {
  auto model = sim::reference_model();
  model.fiber_length_km = 50.0;
  model.intrinsic_error = 0.01;
  const auto scheme = sim::reference_scheme();
  auto tally = sim::expected_tally(model, scheme, 1e9);
  const auto clean = compose_session(tally, scheme, ConfidenceConfig{});
  for (auto& l : tally.levels) l.errors[index(Basis::X)] = l.sifted[index(Basis::X)];
  const auto bad = compose_session(tally, scheme, ConfidenceConfig{});
  EXPECT_EQ(bad.tight[index(Basis::X)].n_secret, 0);
  EXPECT_EQ(bad.tight[index(Basis::Z)].b1_upper, 0.5);
  EXPECT_LT(bad.tight[index(Basis::Z)].n_secret, clean.tight[index(Basis::Z)].n_secret);
}

TEST(ComposeSession, WorstCaseNeverBeatsTight) {
  auto model = sim::reference_model();
  model.intrinsic_error = 0.01;
  const auto scheme = sim::reference_scheme();
  for (double km : {20.0, 60.0, 100.0, 130.0}) {
    model.fiber_length_km = km;
    for (double pulses : {1e8, 1e10}) {
      const auto key = compose_session(sim::expected_tally(model, scheme, pulses), scheme, ConfidenceConfig{});
      EXPECT_LE(key.total_worst, key.total_tight) << km << " km";
      for (Basis b : kBases) EXPECT_LE(key.worst[index(b)].n_secret, key.tight[index(b)].n_secret);
    }
  }
}

TEST(ComposeSession, CalibratedSessionReportHasEveryTerm) {
  const auto cal = sim::calibrate_to_paper(sim::reference_scheme(), sim::reference_model());
  const auto key = compose_session(cal.tally, sim::reference_scheme(), ConfidenceConfig{});
  EXPECT_GT(key.total_tight, key.total_worst);
  const auto j = to_json(key);
  EXPECT_EQ(j["kind"], "key_report");
  for (const char* f : {"n_sifted", "qber", "zero_fraction", "y1_lower", "b1_upper", "mu", "f_ec", "f_pa",
                        "f_ds", "bracket", "n_secret"}) {
    EXPECT_TRUE(j["tight"]["Z"].contains(f)) << f;
  }
}
