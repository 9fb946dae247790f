#include "decoyqkd/types.hpp"

#include <cmath>
#include <sstream>

namespace decoyqkd {

const char* to_string(Basis b) { return b == Basis::X ? "X" : "Z"; }

Basis basis_from_string(const std::string& s) {
  if (s == "X" || s == "x") return Basis::X;
  if (s == "Z" || s == "z") return Basis::Z;
  throw std::invalid_argument("unknown basis '" + s + "'");
}

DecoyScheme::DecoyScheme(std::vector<IntensityLevel> levels) : levels_(std::move(levels)) {
  if (levels_.size() < 2) {
    throw std::invalid_argument("decoy scheme needs at least 2 intensity levels");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    const auto& l = levels_[j];
    if (!(l.mu >= 0.0) || !std::isfinite(l.mu)) {
      throw std::invalid_argument("level " + std::to_string(j) + ": mu must be finite and >= 0");
    }
    if (!(l.send_prob > 0.0 && l.send_prob <= 1.0)) {
      throw std::invalid_argument("level " + std::to_string(j) + ": send_prob must lie in (0, 1]");
    }
    if (j > 0 && !(l.mu > levels_[j - 1].mu)) {
      throw std::invalid_argument("mu values must be strictly increasing");
    }
    total += l.send_prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "send probabilities sum to " << total << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

Count SessionTally::sifted_in(Basis b) const {
  Count n = 0;
  for (const auto& l : levels) n += l.sifted[index(b)];
  return n;
}

Count SessionTally::errors_in(Basis b) const {
  Count n = 0;
  for (const auto& l : levels) n += l.errors[index(b)];
  return n;
}

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be a probability in [0, 1]");
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite and non-negative");
  }
}

}  // namespace

void ChannelModel::validate() const {
  require_non_negative(fiber_length_km, "fiber_length_km");
  require_non_negative(attenuation_db_per_km, "attenuation_db_per_km");
  require_probability(detector_efficiency, "detector_efficiency");
  require_non_negative(dark_rate_hz, "dark_rate_hz");
  require_non_negative(timing_window_s, "timing_window_s");
  require_non_negative(clock_rate_hz, "clock_rate_hz");
  require_probability(intrinsic_error, "intrinsic_error");
  require_non_negative(background_rate_hz, "background_rate_hz");
  require_probability(zero_fraction, "zero_fraction");
}

void ConfidenceConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (photon_cutoff < 2) throw std::invalid_argument("photon_cutoff must be >= 2");
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    const auto& is = issues[i];
    if (i) os << "; ";
    os << "level " << is.level;
    if (is.basis) os << " basis " << to_string(*is.basis);
    os << ": " << is.field << ": " << is.message;
  }
  return os.str();
}

InvalidTally::InvalidTally(ValidationReport report)
    : std::invalid_argument("invalid tally: " + report.summary()), report_(std::move(report)) {}

ValidationReport check_tally(const SessionTally& tally, const DecoyScheme& scheme) {
  ValidationReport report;
  if (tally.levels.size() != scheme.size()) {
    report.issues.push_back({0, std::nullopt, "levels",
                             "tally has " + std::to_string(tally.levels.size()) +
                                 " levels but scheme has " + std::to_string(scheme.size())});
    return report;
  }
  for (std::size_t j = 0; j < tally.levels.size(); ++j) {
    const auto& l = tally.levels[j];
    for (Basis b : kBases) {
      const auto i = index(b);
      auto fail = [&](const char* field, const std::string& msg) {
        report.issues.push_back({j, b, field, msg});
      };
      if (l.errors[i] > l.sifted[i]) {
        fail("errors", std::to_string(l.errors[i]) + " exceeds sifted " + std::to_string(l.sifted[i]));
      }
      if (l.sifted[i] > l.detected[i]) {
        fail("sifted",
             std::to_string(l.sifted[i]) + " exceeds detected " + std::to_string(l.detected[i]));
      }
      if (l.detected[i] > l.sent) {
        fail("detected", std::to_string(l.detected[i]) + " exceeds sent " + std::to_string(l.sent));
      }
    }
    if (l.detected_total() > l.sent) {
      report.issues.push_back({j, std::nullopt, "detected",
                               "total detections " + std::to_string(l.detected_total()) +
                                   " exceed sent " + std::to_string(l.sent)});
    }
  }
  for (Basis b : kBases) {
    if (tally.zeros[index(b)] > tally.sifted_in(b)) {
      report.issues.push_back({0, b, "zeros", "zero count exceeds total sifted bits"});
    }
  }
  return report;
}

const SessionTally& validate_tally(const SessionTally& tally, const DecoyScheme& scheme) {
  auto report = check_tally(tally, scheme);
  if (!report.ok()) throw InvalidTally(std::move(report));
  return tally;
}

}  // namespace decoyqkd
