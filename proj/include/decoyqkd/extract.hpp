#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decoyqkd/types.hpp"

namespace decoyqkd::extract {

inline constexpr int kDefaultDepth = 11;

struct DeskewResult {
  BitString output_bits;
  Count input_length = 0;
  int iteration_depth = 0;
  double input_zero_fraction = 0.5;
  double f_ds = 0.0;  // against the empirical zero fraction of the input
  bool f_ds_defined = false;
};

/// Iterated von Neumann extraction. Level d emits, for each input pair, the
/// first bit of every unequal pair, then appends the extraction (depth d - 1)
/// of the pair-XOR stream, then that of the values of the equal pairs.
/// Depth 1 is plain von Neumann.
DeskewResult peres_extract(const BitString& bits, int depth = kDefaultDepth);

struct DeskewEfficiency {
  double f_ds = 0.0;
  double rate = 0.0;  // output bits per input bit
  bool defined = false;
};

/// f_DS = H2(z) / rate.
DeskewEfficiency measure_f_ds(const DeskewResult& result, double zero_fraction);

/// Expected output bits per input bit of peres_extract on i.i.d. input with
/// P[bit = 0] = zero_fraction, in the long-input limit.
double peres_rate(double zero_fraction, int depth);

/// The n + m - 1 bits that define the m x n Toeplitz matrix for `seed`,
/// drawn 64 at a time from std::mt19937_64, least significant bit first.
BitString toeplitz_seed_bits(std::size_t key_length, std::size_t target_length, std::uint64_t seed);

/// Output bit i is the GF(2) inner product of row i of T with the key, where
/// T[i][j] = r[i - j + n - 1] and r = toeplitz_seed_bits(n, m, seed).
BitString privacy_amplify(const BitString& key, std::size_t target_length, std::uint64_t seed);

struct MonobitResult {
  Count ones = 0;
  Count length = 0;
  double z_score = 0.0;
  bool pass = false;
};

/// |ones - n/2| within `sigmas` standard deviations of a fair coin.
MonobitResult monobit_test(const BitString& bits, double sigmas = 4.0);

struct RunsResult {
  Count runs = 0;
  double expected = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

/// Wald-Wolfowitz runs count against its expectation given the ones count.
RunsResult runs_test(const BitString& bits, double sigmas = 4.0);

std::vector<std::uint8_t> to_bytes(const BitString& bits);  // MSB first, zero padded
std::string to_hex(const BitString& bits);

}  // namespace decoyqkd::extract
