#pragma once

#include <string>
#include <vector>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/stats.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::decoy {

/// Truncated Poisson expansion of each level's observed rate:
///   lower_j - tail_j <= sum_n weights[j][n] * v_n <= upper_j,  v_n in [0, 1].
/// The same shape serves transmittances (v = y) and error yields (v = e).
struct ConstraintRows {
  std::vector<double> mu;
  std::vector<std::vector<double>> weights;  // [level][photon number]
  std::vector<double> tail;                  // Poisson mass beyond the cutoff
  std::vector<double> lower;
  std::vector<double> upper;

  static ConstraintRows build(const std::vector<double>& mu, std::vector<double> lower,
                              std::vector<double> upper, int cutoff);
  std::size_t levels() const { return mu.size(); }
  std::size_t photon_terms() const { return weights.empty() ? 0 : weights.front().size(); }
};

/// Constraints on n-photon transmittances y_n from yield bounds Y_j.
struct YieldConstraintSystem : ConstraintRows {};

/// Constraints on n-photon error yields e_n = y_n * b_n from error-rate bounds
/// B_j, expressed per basis-matched pulse.
struct ErrorConstraintSystem : ConstraintRows {};

struct DecoyOptions {
  // Vacuum contributions carry no basis information, so their error rate is
  // fixed at one half (e_0 = y_0 / 2).
  bool pin_vacuum_error = true;
  double bisection_tol = 1e-9;
};

struct Y1Result {
  double y1_lower = 0.0;
  bool feasible = false;
  int lp_iterations = 0;
  std::vector<std::string> active;  // constraints binding at the optimum
};

struct WorstCaseResult {
  double b1_upper = 1.0;
  double n1_lower = 0.0;  // single-photon basis-matched detections, lower bound
  Count errors = 0;
  bool defined = false;
};

struct TightResult {
  double b1_upper = 1.0;
  bool feasible = false;
  bool defined = false;
  int bisection_iterations = 0;
  int lp_solves = 0;
  std::vector<std::string> active;
};

struct SinglePhotonBounds {
  double y1_lower = 0.0;
  double b1_upper_worst = 1.0;
  double b1_upper_tight = 1.0;
  double n1_lower = 0.0;
  bool feasible = false;
  bool defined = false;  // false forces a zero-length key
};

/// Everything derived from one tally: per-level intervals, single-photon
/// bounds per measurement basis, and the audit trail of the searches.
struct BoundSet {
  std::vector<stats::BinomialBound> yield;
  PerBasis<std::vector<stats::BinomialBound>> error;
  PerBasis<std::vector<Count>> matched_pulses;
  Y1Result y1;
  PerBasis<WorstCaseResult> worst;
  PerBasis<TightResult> tight;
  // Indexed by the basis in which the errors were measured.
  PerBasis<SinglePhotonBounds> single_photon;
  bool reconstructed = false;
  double epsilon = 0.0;
  int bound_count = 0;  // independent binomial bounds drawing on epsilon
};

/// Y_j = detected_j / sent_j over both bases.
std::vector<stats::BinomialBound> yield_bounds(const SessionTally& tally, const DecoyScheme& scheme,
                                               const ConfidenceConfig& cfg);

/// Pulses sent at the level with matching bases in `b`, estimated from the
/// measured sifting ratio: sent * sifted_b / detected.
Count matched_pulses(const LevelTally& level, Basis b);

/// B_j = errors_jb / matched_pulses_jb, i.e. errors per basis-matched pulse.
std::vector<stats::BinomialBound> error_bounds(const SessionTally& tally, const DecoyScheme& scheme,
                                               const ConfidenceConfig& cfg, Basis b);

YieldConstraintSystem make_yield_system(const DecoyScheme& scheme,
                                        const std::vector<stats::BinomialBound>& yield, int cutoff);
ErrorConstraintSystem make_error_system(const DecoyScheme& scheme,
                                        const std::vector<stats::BinomialBound>& error, int cutoff);

Y1Result solve_y1_lower(const YieldConstraintSystem& system);

WorstCaseResult b1_worst_case(const SessionTally& tally, double y1_lower, const DecoyScheme& scheme,
                              Basis b);

/// Largest e_1 / y_1 over the joint polytope with y_1 >= y1_lower, found by
/// bisection on feasibility LPs.
TightResult b1_tight(const YieldConstraintSystem& yields, const ErrorConstraintSystem& errors,
                     double y1_lower, const DecoyOptions& options = {});

BoundSet analyze(const SessionTally& tally, const DecoyScheme& scheme, const ConfidenceConfig& cfg,
                 const DecoyOptions& options = {});

Json to_json(const BoundSet& bounds);

}  // namespace decoyqkd::decoy
