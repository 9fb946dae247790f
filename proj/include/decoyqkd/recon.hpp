#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::recon {

/// One parity disclosed by the key holder: the parity of `positions` (indices
/// into the unpermuted key) during `pass`. Binary-search steps share the pass
/// number of the block being searched.
struct ParityMessage {
  int pass = 0;
  bool binary_search = false;
  std::vector<std::uint32_t> positions;
  std::uint8_t parity = 0;
};

struct Transcript {
  std::vector<ParityMessage> messages;
};

struct ReconciliationResult {
  BitString corrected_key;
  Count parity_bits_leaked = 0;
  int passes = 0;
  Count corrections = 0;
  std::size_t first_block_size = 0;
  bool residual_error_detected = false;
  std::optional<Transcript> transcript;
};

struct CascadeOptions {
  int passes = 4;
  double block_factor = 0.73;  // first-pass block size = block_factor / qber
  bool record_transcript = false;
};

/// Corrects `bob_key` towards `alice_key` with interactive parity checks.
/// Pass 1 uses consecutive blocks; later passes shuffle positions with a
/// generator seeded by `seed` and double the block size. Every block parity of
/// every pass and every binary-search parity counts towards the leak.
ReconciliationResult cascade_reconcile(const BitString& alice_key, const BitString& bob_key,
                                       double estimated_qber, std::uint64_t seed,
                                       const CascadeOptions& options = {});

struct ReconciliationEfficiency {
  double f_ec = 0.0;
  double leak_per_bit = 0.0;
  bool zero_qber = false;  // f_ec undefined; only leak_per_bit is meaningful
};

/// f_EC = leak / (n * H2(qber)).
ReconciliationEfficiency measure_f_ec(const ReconciliationResult& result, Count n, double qber);

Json to_json(const Transcript& transcript);

}  // namespace decoyqkd::recon
