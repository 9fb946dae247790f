#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decoyqkd {

using Count = std::uint64_t;

/// Bit strings are stored one bit per byte (values 0 or 1).
using BitString = std::vector<std::uint8_t>;

enum class Basis : std::uint8_t { X = 0, Z = 1 };

inline constexpr std::array<Basis, 2> kBases{Basis::X, Basis::Z};

constexpr std::size_t index(Basis b) { return static_cast<std::size_t>(b); }
constexpr Basis conjugate(Basis b) { return b == Basis::X ? Basis::Z : Basis::X; }
const char* to_string(Basis b);
Basis basis_from_string(const std::string& s);

template <typename T>
using PerBasis = std::array<T, 2>;

struct IntensityLevel {
  double mu = 0.0;         // mean photon number
  double send_prob = 0.0;  // probability this level is chosen per pulse

  bool operator==(const IntensityLevel&) const = default;
};

/// Intensity levels of a decoy protocol. Levels are sorted by strictly
/// increasing mean photon number; the last level is the signal level used for
/// key generation. Immutable after construction.
class DecoyScheme {
 public:
  DecoyScheme() = default;
  explicit DecoyScheme(std::vector<IntensityLevel> levels);

  const std::vector<IntensityLevel>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  const IntensityLevel& operator[](std::size_t j) const { return levels_[j]; }
  std::size_t signal_index() const { return levels_.size() - 1; }
  const IntensityLevel& signal() const { return levels_.back(); }

  bool operator==(const DecoyScheme&) const = default;

 private:
  std::vector<IntensityLevel> levels_;
};

struct LevelTally {
  Count sent = 0;
  PerBasis<Count> detected{};  // detections where Bob measured in the basis
  PerBasis<Count> sifted{};    // basis-matched detections
  PerBasis<Count> errors{};    // sifted bits whose values disagree

  Count detected_total() const { return detected[0] + detected[1]; }
  Count sifted_total() const { return sifted[0] + sifted[1]; }

  bool operator==(const LevelTally&) const = default;
};

/// Per-intensity, per-basis counts of one acquisition session.
struct SessionTally {
  std::vector<LevelTally> levels;
  PerBasis<Count> zeros{};  // zero-valued sifted bits per basis, all levels
  // Set when per-basis splits or error counts were inferred rather than
  // measured (partial input or calibration output).
  bool reconstructed = false;

  Count sifted_in(Basis b) const;
  Count errors_in(Basis b) const;

  bool operator==(const SessionTally&) const = default;
};

/// Fiber link and detector parameters.
struct ChannelModel {
  double fiber_length_km = 0.0;
  double attenuation_db_per_km = 0.206;
  double detector_efficiency = 0.005;
  double dark_rate_hz = 78.1;  // summed over both detectors
  double timing_window_s = 184e-12;
  double clock_rate_hz = 10e6;
  double intrinsic_error = 0.0;  // interference visibility floor
  double background_rate_hz = 0.0;
  double zero_fraction = 0.5;  // fraction of zeros among sifted bits

  void validate() const;
  bool operator==(const ChannelModel&) const = default;
};

struct ConfidenceConfig {
  double epsilon = 1e-7;  // failure probability of each individual bound
  int photon_cutoff = 10;
  // Infinite-data limit: every interval collapses onto its observed rate and
  // privacy amplification pays no finite-size penalty.
  bool asymptotic = false;

  void validate() const;
  bool operator==(const ConfidenceConfig&) const = default;
};

struct TallyIssue {
  std::size_t level = 0;
  std::optional<Basis> basis;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<TallyIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

class InvalidTally : public std::invalid_argument {
 public:
  explicit InvalidTally(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

ValidationReport check_tally(const SessionTally& tally, const DecoyScheme& scheme);

/// Returns `tally` unchanged when every count chain
/// errors <= sifted <= detected <= sent holds; throws InvalidTally otherwise.
const SessionTally& validate_tally(const SessionTally& tally, const DecoyScheme& scheme);

}  // namespace decoyqkd
