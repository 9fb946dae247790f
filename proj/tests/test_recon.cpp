#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "decoyqkd/recon.hpp"
#include "decoyqkd/stats.hpp"

using namespace decoyqkd;
using namespace decoyqkd::recon;

namespace {

BitString random_key(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BitString k(n);
  for (auto& b : k) b = rng() & 1u;
  return k;
}

BitString with_errors(BitString k, double q, std::uint64_t seed, Count& flipped) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(q);
  flipped = 0;
  for (auto& b : k) {
    if (flip(rng)) {
      b ^= 1u;
      ++flipped;
    }
  }
  return k;
}

Count blocks_over_passes(std::size_t n, std::size_t k1, int passes) {
  Count total = 0;
  std::size_t k = k1;
  for (int p = 0; p < passes; ++p) {
    total += static_cast<Count>((n + k - 1) / k);
    k = std::min(n, 2 * k);
  }
  return total;
}

}  // namespace

TEST(Cascade, IdenticalKeysLeakOnlyBlockParities) {
  const auto a = random_key(1024, 1);
  const auto r = cascade_reconcile(a, a, 0.01, 42);
  EXPECT_EQ(r.corrected_key, a);
  EXPECT_EQ(r.corrections, 0);
  EXPECT_FALSE(r.residual_error_detected);
  EXPECT_EQ(r.first_block_size, 73u);
  EXPECT_EQ(r.parity_bits_leaked, blocks_over_passes(1024, 73, 4));
}

TEST(Cascade, SingleFlipCostsOneBinarySearch) {
  const auto a = random_key(1024, 2);
  auto b = a;
  b[500] ^= 1u;
  CascadeOptions opt;
  opt.record_transcript = true;
  const auto r = cascade_reconcile(a, b, 0.01, 42, opt);
  EXPECT_EQ(r.corrected_key, a);
  EXPECT_EQ(r.corrections, 1);
  const Count search = r.parity_bits_leaked - blocks_over_passes(1024, 73, 4);
  EXPECT_GE(search, static_cast<Count>(std::floor(std::log2(73.0))));
  EXPECT_LE(search, static_cast<Count>(std::ceil(std::log2(73.0))));
}

TEST(Cascade, TranscriptAccountsForEveryLeakedBit) {
  const auto a = random_key(5000, 3);
  Count flipped = 0;
  const auto b = with_errors(a, 0.03, 4, flipped);
  CascadeOptions opt;
  opt.record_transcript = true;
  const auto r = cascade_reconcile(a, b, 0.03, 7, opt);
  ASSERT_TRUE(r.transcript.has_value());
  EXPECT_EQ(static_cast<Count>(r.transcript->messages.size()), r.parity_bits_leaked);
  for (const auto& m : r.transcript->messages) {
    std::uint8_t p = 0;
    for (auto i : m.positions) p ^= a[i];
    ASSERT_EQ(p, m.parity);
  }
  const auto j = to_json(*r.transcript);
  EXPECT_EQ(j.size(), r.transcript->messages.size());
}

TEST(Cascade, DeterministicForFixedSeed) {
  const auto a = random_key(8000, 5);
  Count flipped = 0;
  const auto b = with_errors(a, 0.02, 6, flipped);
  CascadeOptions opt;
  opt.record_transcript = true;
  const auto r1 = cascade_reconcile(a, b, 0.02, 99, opt);
  const auto r2 = cascade_reconcile(a, b, 0.02, 99, opt);
  EXPECT_EQ(r1.corrected_key, r2.corrected_key);
  EXPECT_EQ(r1.parity_bits_leaked, r2.parity_bits_leaked);
  ASSERT_EQ(r1.transcript->messages.size(), r2.transcript->messages.size());
  for (std::size_t i = 0; i < r1.transcript->messages.size(); ++i) {
    EXPECT_EQ(r1.transcript->messages[i].positions, r2.transcript->messages[i].positions);
  }
}

TEST(Cascade, RejectsBadInputs) {
  const auto a = random_key(100, 1);
  EXPECT_THROW(cascade_reconcile(a, random_key(99, 1), 0.03, 1), std::invalid_argument);
  EXPECT_THROW(cascade_reconcile(random_key(63, 1), random_key(63, 2), 0.03, 1), std::invalid_argument);
  EXPECT_THROW(cascade_reconcile(a, a, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(cascade_reconcile(a, a, 0.3, 1), std::invalid_argument);
}

TEST(Cascade, ReconcilesAtThreePercentAndLeaksAboveShannon) {
  const std::size_t n = 10'000;
  int ok = 0;
  double f_sum = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto a = random_key(n, 1000 + s);
    Count flipped = 0;
    const auto b = with_errors(a, 0.03, 5000 + s, flipped);
    const auto r = cascade_reconcile(a, b, 0.03, s);
    if (r.corrected_key == a) ++ok;
    EXPECT_GE(r.parity_bits_leaked, flipped);
    const double q = static_cast<double>(flipped) / n;
    if (flipped > 0) {
      const auto f = measure_f_ec(r, n, q);
      EXPECT_GE(f.f_ec, 1.0) << "seed " << s;
      f_sum += f.f_ec;
    }
  }
  EXPECT_GE(ok, 198);
  const double mean = f_sum / 200.0;
  EXPECT_GE(mean, 1.05);
  EXPECT_LE(mean, 1.25);
}

TEST(Efficiency, ShannonLimitGivesOne) {
  ReconciliationResult r;
  const Count n = 100'000;
  const double q = 0.05;
  r.parity_bits_leaked = static_cast<Count>(std::llround(n * stats::binary_entropy(q)));
  EXPECT_NEAR(measure_f_ec(r, n, q).f_ec, 1.0, 1e-4);
}

TEST(Efficiency, ZeroQberReportsLeakPerBit) {
  ReconciliationResult r;
  r.parity_bits_leaked = 500;
  const auto f = measure_f_ec(r, 1000, 0.0);
  EXPECT_TRUE(f.zero_qber);
  EXPECT_DOUBLE_EQ(f.leak_per_bit, 0.5);
}
