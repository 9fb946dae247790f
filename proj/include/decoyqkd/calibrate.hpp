#pragma once

#include <string>
#include <vector>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::sim {

/// Published aggregates of the 135 km acquisition.
struct CalibrationTargets {
  std::vector<Count> detections{341, 5729, 80776};  // per level, lowest mu first
  Count sifted_bits = 40538;
  Count worst_case_secret = 3990;
  double zero_fraction = 0.494;
  double acquisition_hours = 5.6;
};

struct CalibrationResult {
  ChannelModel model;  // input model plus fitted background rate and intrinsic error
  double pulses = 0.0;
  double duty_cycle = 0.0;  // pulses / (acquisition time * clock rate)
  SessionTally tally;       // expected counts, flagged as reconstructed
  std::vector<double> expected_detections;
  std::vector<double> detection_residuals;  // relative, per level
  double expected_sifted = 0.0;
  double sifted_residual = 0.0;
  Count secret_tight = 0;
  Count secret_worst = 0;
  bool ok = false;
  std::vector<std::string> diagnostics;
};

/// Fits, in order: the per-pulse dark probability from the ratio of lowest to
/// highest level detections (the excess over the detector dark rate becomes
/// background_rate_hz), the number of pulses from the signal-level
/// detections, and the intrinsic error so that the worst-case analysis of the
/// expected tally returns `targets.worst_case_secret`.
CalibrationResult calibrate_to_paper(const DecoyScheme& scheme, const ChannelModel& model,
                                     const CalibrationTargets& targets = {},
                                     const ConfidenceConfig& cfg = {},
                                     const keyrate::ComposeOptions& options = {});

Json to_json(const CalibrationResult& result);

}  // namespace decoyqkd::sim
