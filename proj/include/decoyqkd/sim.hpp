#pragma once

#include <cstdint>
#include <vector>

#include "decoyqkd/types.hpp"

namespace decoyqkd::sim {

struct LinkBudget {
  double total_loss_db = 0.0;          // fiber attenuation only
  double eta = 0.0;                    // fiber transmittance times detector efficiency
  double dark_prob_per_window = 0.0;   // dark plus background clicks per pulse slot
};

LinkBudget link_budget(const ChannelModel& model);

struct LevelExpectation {
  double yield = 0.0;       // detection probability per pulse
  double error_rate = 0.0;  // error probability per sifted detection
};

/// Independent-photon loss model with a dark/background floor.
std::vector<LevelExpectation> expected_statistics(const ChannelModel& model, const DecoyScheme& scheme);

/// Transmittance of an n-photon pulse: 1 - (1 - p_dark)(1 - eta)^n.
double photon_yield(const LinkBudget& link, int n);
/// Error rate of an n-photon pulse.
double photon_error_rate(const LinkBudget& link, double intrinsic_error, int n);

/// Rounded expected counts for `pulses` total pulses with unbiased basis
/// choices on both sides.
SessionTally expected_tally(const ChannelModel& model, const DecoyScheme& scheme, double pulses);

struct SimulationOptions {
  // Up to this many pulses every pulse is sampled individually; above it
  // counts are drawn per level from binomials.
  Count per_pulse_limit = 1'000'000;
  bool keep_keys = true;
};

/// One Monte-Carlo realization. Raw keys hold the signal-level sifted bits of
/// each basis in detection order; bob = alice XOR error pattern.
struct SimulatedSession {
  SessionTally tally;
  PerBasis<BitString> alice;
  PerBasis<BitString> bob;
};

SimulatedSession simulate_session(const ChannelModel& model, const DecoyScheme& scheme, Count pulses,
                                  std::uint64_t seed, const SimulationOptions& options = {});

/// The three-level scheme used for the 135 km acquisition.
DecoyScheme reference_scheme();
/// Detector and fiber parameters of the reference system at 135 km.
ChannelModel reference_model();

}  // namespace decoyqkd::sim
