#include "decoyqkd/calibrate.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "decoyqkd/sim.hpp"

namespace decoyqkd::sim {

namespace {

double detections_per_pulse(const DecoyScheme& scheme, const ChannelModel& m, std::size_t j) {
  return scheme[j].send_prob * expected_statistics(m, scheme)[j].yield;
}

}  // namespace

CalibrationResult calibrate_to_paper(const DecoyScheme& scheme, const ChannelModel& model,
                                     const CalibrationTargets& targets, const ConfidenceConfig& cfg,
                                     const keyrate::ComposeOptions& options) {
  if (targets.detections.size() != scheme.size()) {
    throw std::invalid_argument("calibrate: one detection target per level is required");
  }
  model.validate();
  CalibrationResult r;
  r.ok = true;
  ChannelModel m = model;
  m.zero_fraction = targets.zero_fraction;
  const std::size_t lo = 0, hi = scheme.signal_index();
  const double target_ratio =
      static_cast<double>(targets.detections[lo]) / static_cast<double>(targets.detections[hi]);

  // 1. Dark probability per window from the lowest/highest detection ratio.
  auto ratio_gap = [&](double pd) {
    ChannelModel t = m;
    t.dark_rate_hz = pd / m.timing_window_s;
    t.background_rate_hz = 0.0;
    return detections_per_pulse(scheme, t, lo) / detections_per_pulse(scheme, t, hi) - target_ratio;
  };
  if (ratio_gap(0.0) >= 0.0) {
    r.diagnostics.push_back("lowest-level detections are explained without any dark counts");
    r.ok = false;
  } else {
    double a = 0.0, b = 1e-6;
    while (ratio_gap(b) < 0.0 && b < 0.5) b *= 2.0;
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(ratio_gap, a, b,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
    const double pd = 0.5 * (root.first + root.second);
    const double extra = pd / m.timing_window_s - m.dark_rate_hz;
    if (extra < 0.0) {
      r.diagnostics.push_back("fitted dark probability is below the detector dark rate; background set to 0");
      m.background_rate_hz = 0.0;
    } else {
      m.background_rate_hz = extra;
    }
  }

  // 2. Pulse count from the signal level.
  r.pulses = static_cast<double>(targets.detections[hi]) / detections_per_pulse(scheme, m, hi);
  const double slots = targets.acquisition_hours * 3600.0 * m.clock_rate_hz;
  r.duty_cycle = slots > 0.0 ? r.pulses / slots : 0.0;
  if (r.duty_cycle > 1.0) {
    r.diagnostics.push_back("implied duty cycle exceeds 1");
    r.ok = false;
  }

  // 3. Intrinsic error from the worst-case secret length.
  auto worst_at = [&](double e) {
    ChannelModel t = m;
    t.intrinsic_error = e;
    const auto tally = expected_tally(t, scheme, r.pulses);
    return keyrate::compose_session(tally, scheme, cfg, options).total_worst;
  };
  const Count target = targets.worst_case_secret;
  if (worst_at(0.0) < target) {
    r.diagnostics.push_back("worst-case secret length is below target even without intrinsic error");
    r.ok = false;
    m.intrinsic_error = 0.0;
  } else {
    double a = 0.0, b = 0.01;
    while (worst_at(b) > target && b < 0.5) b = std::min(0.5, 2.0 * b);
    // worst_at is non-increasing; keep a with worst >= target and b below.
    while (b - a > 1e-8) {
      const double mid = 0.5 * (a + b);
      (worst_at(mid) >= target ? a : b) = mid;
    }
    const auto wa = worst_at(a), wb = worst_at(b);
    m.intrinsic_error = (wa - target <= target - wb) ? a : b;
  }

  r.model = m;
  r.tally = expected_tally(m, scheme, r.pulses);
  validate_tally(r.tally, scheme);
  for (std::size_t j = 0; j < scheme.size(); ++j) {
    const double e = r.pulses * detections_per_pulse(scheme, m, j);
    r.expected_detections.push_back(e);
    r.detection_residuals.push_back(e / static_cast<double>(targets.detections[j]) - 1.0);
  }
  r.expected_sifted = static_cast<double>(r.tally.levels[hi].sifted_total());
  r.sifted_residual = r.expected_sifted / static_cast<double>(targets.sifted_bits) - 1.0;
  if (std::abs(r.sifted_residual) > 0.02) {
    r.diagnostics.push_back("signal-level sifted count deviates from target by more than 2%");
    r.ok = false;
  }
  const auto key = keyrate::compose_session(r.tally, scheme, cfg, options);
  r.secret_tight = key.total_tight;
  r.secret_worst = key.total_worst;
  return r;
}

Json to_json(const CalibrationResult& r) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "calibration";
  j["ok"] = r.ok;
  j["model"] = to_json(r.model);
  j["pulses"] = r.pulses;
  j["duty_cycle"] = r.duty_cycle;
  j["expected_detections"] = r.expected_detections;
  j["detection_residuals"] = r.detection_residuals;
  j["expected_sifted"] = r.expected_sifted;
  j["sifted_residual"] = r.sifted_residual;
  j["secret_tight"] = r.secret_tight;
  j["secret_worst_case"] = r.secret_worst;
  j["diagnostics"] = r.diagnostics;
  j["tally"] = to_json(r.tally);
  return j;
}

}  // namespace decoyqkd::sim
