#include "decoyqkd/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "decoyqkd/stats.hpp"

namespace decoyqkd::recon {

namespace {

struct Pass {
  std::vector<std::uint32_t> order;     // position at each permuted slot
  std::vector<std::uint32_t> slot_of;   // inverse of order
  std::size_t block_size = 0;

  std::size_t block_of(std::uint32_t pos) const { return slot_of[pos] / block_size; }
  std::size_t blocks() const { return (order.size() + block_size - 1) / block_size; }
};

class Cascade {
 public:
  Cascade(const BitString& alice, BitString bob, bool record)
      : alice_(alice), bob_(std::move(bob)) {
    if (record) transcript_.emplace();
  }

  std::uint8_t parity(const BitString& key, const std::uint32_t* first, const std::uint32_t* last) const {
    std::uint8_t p = 0;
    for (auto it = first; it != last; ++it) p ^= key[*it];
    return p;
  }

  // Alice discloses the parity of the given positions.
  std::uint8_t disclose(int pass, bool search, const std::uint32_t* first, const std::uint32_t* last) {
    ++leak_;
    const auto p = parity(alice_, first, last);
    if (transcript_) transcript_->messages.push_back({pass, search, {first, last}, p});
    return p;
  }

  void run_pass(int p) {
    const Pass& pass = passes_[p];
    alice_parity_.emplace_back(pass.blocks());
    std::vector<std::size_t> mismatched;
    for (std::size_t b = 0; b < pass.blocks(); ++b) {
      const auto [first, last] = block_range(pass, b);
      alice_parity_[p][b] = disclose(p, false, first, last);
      if (alice_parity_[p][b] != parity(bob_, first, last)) mismatched.push_back(b);
    }
    std::vector<std::pair<int, std::size_t>> queue;
    for (auto b : mismatched) queue.emplace_back(p, b);
    while (!queue.empty()) {
      const auto [q, b] = queue.back();
      queue.pop_back();
      const auto [first, last] = block_range(passes_[q], b);
      if (alice_parity_[q][b] == parity(bob_, first, last)) continue;
      const auto pos = binary_search(q, first, last);
      bob_[pos] ^= 1;
      ++corrections_;
      for (int r = 0; r <= p; ++r) {
        if (r != q) queue.emplace_back(r, passes_[r].block_of(pos));
      }
    }
  }

  void add_pass(Pass pass) { passes_.push_back(std::move(pass)); }

  BitString& bob() { return bob_; }
  Count leak() const { return leak_; }
  Count corrections() const { return corrections_; }
  std::optional<Transcript>& transcript() { return transcript_; }

 private:
  std::pair<const std::uint32_t*, const std::uint32_t*> block_range(const Pass& pass, std::size_t b) const {
    const std::size_t lo = b * pass.block_size;
    const std::size_t hi = std::min(pass.order.size(), lo + pass.block_size);
    return {pass.order.data() + lo, pass.order.data() + hi};
  }

  // Halves a block with odd error parity down to one erroneous position.
  std::uint32_t binary_search(int pass, const std::uint32_t* first, const std::uint32_t* last) {
    while (last - first > 1) {
      const auto mid = first + (last - first) / 2;
      if (disclose(pass, true, first, mid) != parity(bob_, first, mid)) {
        last = mid;
      } else {
        first = mid;
      }
    }
    return *first;
  }

  const BitString& alice_;
  BitString bob_;
  std::vector<Pass> passes_;
  std::vector<std::vector<std::uint8_t>> alice_parity_;
  Count leak_ = 0;
  Count corrections_ = 0;
  std::optional<Transcript> transcript_;
};

}  // namespace

ReconciliationResult cascade_reconcile(const BitString& alice, const BitString& bob, double qber,
                                       std::uint64_t seed, const CascadeOptions& opt) {
  if (alice.size() != bob.size()) throw std::invalid_argument("cascade: keys differ in length");
  if (alice.size() < 64) throw std::invalid_argument("cascade: keys must hold at least 64 bits");
  if (alice.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("cascade: key too long");
  }
  if (!(qber > 0.0 && qber <= 0.25)) throw std::invalid_argument("cascade: estimated qber outside (0, 0.25]");
  if (opt.passes < 1) throw std::invalid_argument("cascade: at least one pass is required");

  const std::size_t n = alice.size();
  std::size_t block = static_cast<std::size_t>(std::max<long>(2, std::lround(opt.block_factor / qber)));
  block = std::min(block, n);

  Cascade c(alice, bob, opt.record_transcript);
  std::mt19937_64 rng(seed);
  ReconciliationResult r;
  r.first_block_size = block;
  for (int p = 0; p < opt.passes; ++p) {
    Pass pass;
    pass.order.resize(n);
    std::iota(pass.order.begin(), pass.order.end(), 0u);
    if (p > 0) std::shuffle(pass.order.begin(), pass.order.end(), rng);
    pass.slot_of.resize(n);
    for (std::uint32_t s = 0; s < n; ++s) pass.slot_of[pass.order[s]] = s;
    pass.block_size = std::min(n, block << p);
    c.add_pass(std::move(pass));
    c.run_pass(p);
  }
  r.corrected_key = std::move(c.bob());
  r.parity_bits_leaked = c.leak();
  r.passes = opt.passes;
  r.corrections = c.corrections();
  r.residual_error_detected = r.corrected_key != alice;
  r.transcript = std::move(c.transcript());
  return r;
}

ReconciliationEfficiency measure_f_ec(const ReconciliationResult& result, Count n, double qber) {
  if (n == 0) throw std::invalid_argument("measure_f_ec: n must be positive");
  ReconciliationEfficiency e;
  e.leak_per_bit = static_cast<double>(result.parity_bits_leaked) / static_cast<double>(n);
  const double h = stats::binary_entropy(std::clamp(qber, 0.0, 1.0));
  if (h <= 0.0) {
    e.zero_qber = true;
    e.f_ec = e.leak_per_bit;
    return e;
  }
  e.f_ec = e.leak_per_bit / h;
  return e;
}

Json to_json(const Transcript& t) {
  Json j = Json::array();
  for (const auto& m : t.messages) {
    j.push_back(Json{{"pass", m.pass}, {"search", m.binary_search}, {"positions", m.positions}, {"parity", m.parity}});
  }
  return j;
}

}  // namespace decoyqkd::recon
