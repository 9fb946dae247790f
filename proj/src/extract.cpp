#include "decoyqkd/extract.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "decoyqkd/stats.hpp"

namespace decoyqkd::extract {

namespace {

void peres(const BitString& in, int depth, BitString& out) {
  if (depth <= 0 || in.size() < 2) return;
  BitString xors, agreements;
  xors.reserve(in.size() / 2);
  for (std::size_t i = 0; i + 1 < in.size(); i += 2) {
    const auto a = in[i], b = in[i + 1];
    xors.push_back(static_cast<std::uint8_t>(a ^ b));
    if (a != b) {
      out.push_back(a);
    } else {
      agreements.push_back(a);
    }
  }
  peres(xors, depth - 1, out);
  peres(agreements, depth - 1, out);
}

double zero_fraction_of(const BitString& bits) {
  if (bits.empty()) return 0.5;
  const auto zeros = std::count(bits.begin(), bits.end(), std::uint8_t{0});
  return static_cast<double>(zeros) / static_cast<double>(bits.size());
}

}  // namespace

DeskewResult peres_extract(const BitString& bits, int depth) {
  if (depth < 1) throw std::invalid_argument("peres_extract: depth must be >= 1");
  DeskewResult r;
  r.input_length = bits.size();
  r.iteration_depth = depth;
  r.input_zero_fraction = zero_fraction_of(bits);
  r.output_bits.reserve(bits.size() / 2);
  peres(bits, depth, r.output_bits);
  const auto e = measure_f_ds(r, r.input_zero_fraction);
  r.f_ds = e.f_ds;
  r.f_ds_defined = e.defined;
  return r;
}

DeskewEfficiency measure_f_ds(const DeskewResult& result, double z) {
  DeskewEfficiency e;
  if (result.output_bits.empty() || result.input_length == 0 || !(z > 0.0 && z < 1.0)) return e;
  e.rate = static_cast<double>(result.output_bits.size()) / static_cast<double>(result.input_length);
  e.f_ds = stats::binary_entropy(z) / e.rate;
  e.defined = true;
  return e;
}

double peres_rate(double z, int depth) {
  if (depth <= 0 || z <= 0.0 || z >= 1.0) return 0.0;
  const double q = 1.0 - z;
  const double same = z * z + q * q;
  return z * q + 0.5 * peres_rate(same, depth - 1) + 0.5 * same * peres_rate(z * z / same, depth - 1);
}

BitString toeplitz_seed_bits(std::size_t n, std::size_t m, std::uint64_t seed) {
  BitString r;
  if (n == 0 || m == 0) return r;
  const std::size_t len = n + m - 1;
  r.resize(len);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < len; i += 64) {
    const std::uint64_t w = rng();
    for (std::size_t b = 0; b < 64 && i + b < len; ++b) r[i + b] = static_cast<std::uint8_t>((w >> b) & 1u);
  }
  return r;
}

BitString privacy_amplify(const BitString& key, std::size_t m, std::uint64_t seed) {
  const std::size_t n = key.size();
  if (m > n) throw std::invalid_argument("privacy_amplify: target length exceeds key length");
  if (m == 0) return {};
  const auto r = toeplitz_seed_bits(n, m, seed);

  // Row i of T against the key equals r[i .. i+n-1] against the reversed key,
  // so pack both into words and slide the window over r.
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> rev(words, 0), packed_r((r.size() + 63) / 64 + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (key[n - 1 - k]) rev[k / 64] |= std::uint64_t{1} << (k % 64);
  }
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k]) packed_r[k / 64] |= std::uint64_t{1} << (k % 64);
  }
  const std::uint64_t last_mask = n % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (n % 64)) - 1;

  BitString out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t word = i / 64, shift = i % 64;
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t win = packed_r[word + w] >> shift;
      if (shift != 0) win |= packed_r[word + w + 1] << (64 - shift);
      if (w + 1 == words) win &= last_mask;
      acc ^= win & rev[w];
    }
    out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

MonobitResult monobit_test(const BitString& bits, double sigmas) {
  MonobitResult r;
  r.length = bits.size();
  r.ones = static_cast<Count>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  if (r.length == 0) return r;
  const double n = static_cast<double>(r.length);
  r.z_score = (static_cast<double>(r.ones) - 0.5 * n) / (0.5 * std::sqrt(n));
  r.pass = std::abs(r.z_score) < sigmas;
  return r;
}

RunsResult runs_test(const BitString& bits, double sigmas) {
  RunsResult r;
  if (bits.size() < 2) return r;
  r.runs = 1;
  for (std::size_t i = 1; i < bits.size(); ++i) r.runs += bits[i] != bits[i - 1];
  const double n = static_cast<double>(bits.size());
  const double n1 = static_cast<double>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  const double n0 = n - n1;
  r.expected = 1.0 + 2.0 * n0 * n1 / n;
  const double var = 2.0 * n0 * n1 * (2.0 * n0 * n1 - n) / (n * n * (n - 1.0));
  if (var <= 0.0) return r;
  r.z_score = (static_cast<double>(r.runs) - r.expected) / std::sqrt(var);
  r.pass = std::abs(r.z_score) < sigmas;
  return r;
}

std::vector<std::uint8_t> to_bytes(const BitString& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

std::string to_hex(const BitString& bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto byte : to_bytes(bits)) {
    s.push_back(digits[byte >> 4]);
    s.push_back(digits[byte & 0xF]);
  }
  return s;
}

}  // namespace decoyqkd::extract
