#pragma once

#include <string>
#include <vector>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::opt {

struct EvaluateOptions {
  ConfidenceConfig confidence;
  keyrate::ComposeOptions compose;
};

/// Analysis of the expected tally of a scheme at the model's distance.
struct Evaluation {
  DecoyScheme scheme;
  Count secret_tight = 0;
  Count secret_worst = 0;
  double y1_lower = 0.0;
  double b1_worst = 1.0;  // larger of the two bases
  double b1_tight = 1.0;
  // Search objectives: unfloored secret bits where positive, otherwise the
  // (negative) mean bracket; -infinity when no single-photon bound exists.
  double score_tight = 0.0;
  double score_worst = 0.0;
};

Evaluation evaluate_scheme(const ChannelModel& model, const DecoyScheme& scheme, double pulses,
                           const EvaluateOptions& options = {});

/// Three-level scheme (vacuum-like, decoy, signal) with the weakest level
/// tied to the signal level by a fixed extinction ratio.
struct SchemeSpace {
  double extinction_db = 23.5;
  double mu1_min = 0.01, mu1_max = 0.6;
  double mu2_min = 0.05, mu2_max = 1.5;
  double p_min = 0.01;          // each sending probability
  double signal_p_min = 0.05;

  DecoyScheme make(double mu1, double mu2, double p0, double p1) const;
  bool admissible(double mu1, double mu2, double p0, double p1) const;
};

struct TraceEntry {
  int stage = 0;  // 0 = coarse grid, 1..3 = refinement stages
  double mu1 = 0, mu2 = 0, p0 = 0, p1 = 0;
  double score = 0;
  Count secret = 0;
};

struct OptimizeOptions {
  SchemeSpace space;
  EvaluateOptions evaluate;
  bool maximize_worst_case = false;  // objective uses worst-case b1 instead of the tight bound
  int threads = 1;
  bool keep_trace = true;
};

struct OptimizationResult {
  Evaluation best;
  std::vector<TraceEntry> trace;
  bool zero_key = true;
  int evaluations = 0;
};

/// Coarse grid over (mu1, mu2, p0, p1) followed by coordinate descent with
/// three step-halving refinement stages.
OptimizationResult optimize_scheme(const ChannelModel& model, double pulses,
                                   const OptimizeOptions& options = {});

struct CurvePoint {
  double distance_km = 0.0;
  Evaluation eval;
};

struct RangeCurve {
  std::vector<CurvePoint> points;
  double range_tight_km = 0.0;  // last distance with a positive key
  double range_worst_km = 0.0;
};

struct CurveOptions {
  bool optimize = false;
  DecoyScheme scheme;  // used when not optimizing
  OptimizeOptions optimizer;
  bool refine_endpoints = true;
  double endpoint_tolerance_km = 0.01;
};

RangeCurve range_curve(const ChannelModel& model, double pulses, const std::vector<double>& distances_km,
                       const CurveOptions& options);

/// Maximum distance with a positive key, by bisection between `near_km`
/// (positive key) and `far_km` (no key).
double range_endpoint(const ChannelModel& model, double pulses, double near_km, double far_km,
                      bool worst_case, const CurveOptions& options);

std::string curve_csv_header();
std::string to_csv(const RangeCurve& curve);
Json to_json(const OptimizationResult& result);

}  // namespace decoyqkd::opt
