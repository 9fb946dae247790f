#pragma once

#include <string>

#include "decoyqkd/decoy.hpp"
#include "decoyqkd/json_io.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::keyrate {

/// Every term that enters the secret length of one basis.
///
///   n_secret = n_sifted * [ s1 * (1 - f_pa * H2(b1)) - f_ec * H2(qber)
///                           - (1 - H2(z) / f_ds) ]
///
/// where s1 = min(1, y1_lower * mu * exp(-mu) / signal_gain) is the lower
/// bound on the fraction of sifted bits that came from single photons.
struct KeyBudget {
  Basis basis = Basis::X;
  Count n_sifted = 0;
  double qber = 0.0;
  double zero_fraction = 0.5;
  double y1_lower = 0.0;
  double b1_upper = 0.0;  // measured in the conjugate basis
  double mu = 0.0;
  double signal_gain = 1.0;  // detections per pulse at the signal level
  double f_ec = 1.0;
  double f_pa = 1.0;
  double f_ds = 1.0;

  // Filled in by evaluate().
  double single_photon_fraction = 0.0;
  double bracket = 0.0;
  Count n_secret = 0;
  std::string reason;
};

double single_photon_fraction(double y1_lower, double mu, double signal_gain);

/// Computes the derived fields of `budget` in place and returns n_secret.
Count evaluate(KeyBudget& budget);

/// n_secret for the given inputs without modifying them.
Count secret_length(const KeyBudget& budget);

struct PrivacyAmplification {
  double f_pa = 1.0;
  Count threshold = 0;        // typical-set radius t
  double log2_typical = 0.0;  // log2 of sum_{k<=t} C(n1, k)
};

/// Typical-set size of n1 bits through a binary symmetric channel with error
/// rate b1, relative to n1 * H2(b1). t is the smallest integer with
/// P[Binom(n1, b1) > t] <= epsilon.
PrivacyAmplification privacy_amplification(Count n1, double b1_upper, double epsilon);
double privacy_amplification_factor(Count n1, double b1_upper, double epsilon);

struct ComposeOptions {
  double f_ec = 1.07;
  double f_ds = 1.05;
  decoy::DecoyOptions decoy;
};

struct SessionKey {
  decoy::BoundSet bounds;
  PerBasis<KeyBudget> tight;
  PerBasis<KeyBudget> worst;
  Count total_tight = 0;
  Count total_worst = 0;
};

/// Full analysis of one tally. Key bits come from the signal level of each
/// basis; the single-photon error bound of the other basis sets the privacy
/// amplification.
SessionKey compose_session(const SessionTally& tally, const DecoyScheme& scheme,
                           const ConfidenceConfig& cfg, const ComposeOptions& options = {});

/// Same, reusing an existing bound set.
SessionKey compose_session(const SessionTally& tally, const DecoyScheme& scheme,
                           const ConfidenceConfig& cfg, const decoy::BoundSet& bounds,
                           const ComposeOptions& options);

Json to_json(const KeyBudget& budget);
Json to_json(const SessionKey& key);

}  // namespace decoyqkd::keyrate
