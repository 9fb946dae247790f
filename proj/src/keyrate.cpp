#include "decoyqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decoyqkd/stats.hpp"

namespace decoyqkd::keyrate {

double single_photon_fraction(double y1_lower, double mu, double signal_gain) {
  if (!(signal_gain > 0.0)) return 0.0;
  return std::clamp(y1_lower * mu * std::exp(-mu) / signal_gain, 0.0, 1.0);
}

Count evaluate(KeyBudget& b) {
  if (b.f_ec < 1.0 || b.f_pa < 1.0 || b.f_ds < 1.0) {
    throw std::invalid_argument("efficiency factors must be >= 1");
  }
  const double b1 = std::clamp(b.b1_upper, 0.0, 0.5);
  const double qber = std::clamp(b.qber, 0.0, 0.5);
  b.single_photon_fraction = single_photon_fraction(b.y1_lower, b.mu, b.signal_gain);
  b.bracket = b.single_photon_fraction * (1.0 - b.f_pa * stats::binary_entropy(b1)) -
              b.f_ec * stats::binary_entropy(qber) -
              (1.0 - stats::binary_entropy(b.zero_fraction) / b.f_ds);
  b.n_secret = 0;
  if (b.single_photon_fraction <= 0.0) {
    b.reason = "no single-photon credit";
  } else if (b.bracket <= 0.0) {
    b.reason = "non-positive bracket";
  } else {
    b.n_secret = std::min(b.n_sifted, static_cast<Count>(std::floor(static_cast<double>(b.n_sifted) * b.bracket)));
    b.reason = "ok";
  }
  return b.n_secret;
}

Count secret_length(const KeyBudget& budget) {
  KeyBudget copy = budget;
  return evaluate(copy);
}

namespace {

// log2 of sum_{k=0}^{t} C(n, k), summed outward from the largest term.
double log2_binomial_prefix(Count n, Count t) {
  const Count peak = std::min(t, n / 2);
  const double log_peak = stats::log_binomial_coefficient(n, peak);
  double sum = 1.0;
  double term = 1.0;
  for (Count k = peak; k > 0; --k) {
    term *= static_cast<double>(k) / static_cast<double>(n - k + 1);  // C(n,k-1)/C(n,k)
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  term = 1.0;
  for (Count k = peak + 1; k <= t; ++k) {
    term *= static_cast<double>(n - k + 1) / static_cast<double>(k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return (log_peak + std::log(sum)) / std::log(2.0);
}

}  // namespace

PrivacyAmplification privacy_amplification(Count n1, double b1, double epsilon) {
  if (n1 < 1) throw std::invalid_argument("privacy_amplification: n1 must be >= 1");
  if (!(b1 >= 0.0 && b1 <= 0.5)) throw std::invalid_argument("privacy_amplification: b1 outside [0, 0.5]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("privacy_amplification: bad epsilon");
  PrivacyAmplification r;
  if (b1 == 0.0) return r;
  // Smallest t with P[X > t] = P[X >= t + 1] <= epsilon.
  Count lo = 0, hi = n1;
  while (lo < hi) {
    const Count mid = lo + (hi - lo) / 2;
    if (stats::binomial_sf(mid + 1, n1, b1) <= epsilon) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  r.threshold = lo;
  r.log2_typical = log2_binomial_prefix(n1, lo);
  r.f_pa = std::max(1.0, r.log2_typical / (static_cast<double>(n1) * stats::binary_entropy(b1)));
  return r;
}

double privacy_amplification_factor(Count n1, double b1, double epsilon) {
  return privacy_amplification(n1, b1, epsilon).f_pa;
}

SessionKey compose_session(const SessionTally& tally, const DecoyScheme& scheme,
                           const ConfidenceConfig& cfg, const ComposeOptions& options) {
  return compose_session(tally, scheme, cfg, decoy::analyze(tally, scheme, cfg, options.decoy), options);
}

SessionKey compose_session(const SessionTally& tally, const DecoyScheme& scheme,
                           const ConfidenceConfig& cfg, const decoy::BoundSet& bounds,
                           const ComposeOptions& options) {
  validate_tally(tally, scheme);
  SessionKey out;
  out.bounds = bounds;
  const auto& sig = tally.levels[scheme.signal_index()];
  const double mu = scheme.signal().mu;
  const double gain =
      sig.sent > 0 ? static_cast<double>(sig.detected_total()) / static_cast<double>(sig.sent) : 0.0;

  for (Basis b : kBases) {
    const auto i = index(b);
    KeyBudget base;
    base.basis = b;
    base.n_sifted = sig.sifted[i];
    base.qber = sig.sifted[i] > 0 ? static_cast<double>(sig.errors[i]) / static_cast<double>(sig.sifted[i]) : 0.0;
    const Count sifted_all = tally.sifted_in(b);
    base.zero_fraction =
        sifted_all > 0 ? static_cast<double>(tally.zeros[i]) / static_cast<double>(sifted_all) : 0.5;
    base.y1_lower = bounds.y1.y1_lower;
    base.mu = mu;
    base.signal_gain = gain;
    base.f_ec = options.f_ec;
    base.f_ds = options.f_ds;

    const auto& sp = bounds.single_photon[index(conjugate(b))];
    for (int variant = 0; variant < 2; ++variant) {
      KeyBudget k = base;
      k.b1_upper = std::clamp(variant == 0 ? sp.b1_upper_tight : sp.b1_upper_worst, 0.0, 0.5);
      if (!sp.defined) {
        k.single_photon_fraction = 0.0;
        k.bracket = 0.0;
        k.n_secret = 0;
        k.reason = sp.feasible ? "single-photon bounds undefined" : "decoy constraints infeasible";
      } else {
        const double frac = single_photon_fraction(k.y1_lower, mu, gain);
        const auto n1 = static_cast<Count>(std::floor(static_cast<double>(k.n_sifted) * frac));
        k.f_pa = n1 >= 1 && !cfg.asymptotic ? privacy_amplification_factor(n1, k.b1_upper, cfg.epsilon) : 1.0;
        evaluate(k);
      }
      (variant == 0 ? out.tight : out.worst)[i] = k;
    }
    out.total_tight += out.tight[i].n_secret;
    out.total_worst += out.worst[i].n_secret;
  }
  return out;
}

Json to_json(const KeyBudget& b) {
  return Json{{"basis", to_string(b.basis)},
              {"n_sifted", b.n_sifted},
              {"qber", b.qber},
              {"zero_fraction", b.zero_fraction},
              {"y1_lower", b.y1_lower},
              {"b1_upper", b.b1_upper},
              {"mu", b.mu},
              {"signal_gain", b.signal_gain},
              {"single_photon_fraction", b.single_photon_fraction},
              {"f_ec", b.f_ec},
              {"f_pa", b.f_pa},
              {"f_ds", b.f_ds},
              {"bracket", b.bracket},
              {"n_secret", b.n_secret},
              {"reason", b.reason}};
}

Json to_json(const SessionKey& k) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "key_report";
  j["bounds"] = decoy::to_json(k.bounds);
  for (Basis b : kBases) {
    j["tight"][to_string(b)] = to_json(k.tight[index(b)]);
    j["worst_case"][to_string(b)] = to_json(k.worst[index(b)]);
  }
  j["total_secret_tight"] = k.total_tight;
  j["total_secret_worst_case"] = k.total_worst;
  return j;
}

}  // namespace decoyqkd::keyrate
