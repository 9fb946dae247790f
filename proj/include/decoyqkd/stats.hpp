#pragma once

#include <vector>

#include "decoyqkd/types.hpp"

namespace decoyqkd::stats {

/// One-sided exact binomial confidence bounds on a rate k/n.
///
/// `lower` is the largest p with P[Binom(n,p) >= k] <= epsilon and `upper`
/// the smallest p with P[Binom(n,p) <= k] <= epsilon, so each side fails with
/// probability at most epsilon. Trials == 0 yields [0, 1] with `degenerate`.
struct BinomialBound {
  Count observed = 0;
  Count trials = 0;
  double epsilon = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  bool degenerate = false;
};

BinomialBound binomial_interval(Count k, Count n, double epsilon);

// Exact binomial tails, accumulated term by term away from the mode starting
// from a saddle-point evaluation of the outermost pmf term.
double binomial_cdf(Count k, Count n, double p);  // P[X <= k]
double binomial_sf(Count k, Count n, double p);   // P[X >= k]

double log_binomial_coefficient(Count n, Count k);

/// Shannon binary entropy in bits; throws std::domain_error outside [0, 1].
double binary_entropy(double p);

struct PoissonWeights {
  std::vector<double> weights;  // e^{-mu} mu^n / n!, n = 0..cutoff
  double tail = 0.0;            // mass beyond the cutoff
};

PoissonWeights poisson_weights(double mu, int cutoff);

}  // namespace decoyqkd::stats
