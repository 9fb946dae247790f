#include "decoyqkd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace decoyqkd::stats {

namespace {

constexpr double kRelStop = 1e-18;

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12, s1 = 1.0 / 360, s2 = 1.0 / 1260, s3 = 1.0 / 1680, s4 = 1.0 / 1188;
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double nn = n * n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// x log(x / m) + m - x without cancellation when x is close to m.
double deviance(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    const double v = (x - m) / (x + m);
    double s = (x - m) * v, ej = 2.0 * x * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v * v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

// Saddle-point form of the binomial log-pmf; accurate for any n.
double log_pmf(Count i, Count n, double p) {
  const double nd = static_cast<double>(n), x = static_cast<double>(i), q = 1.0 - p;
  if (i == 0) return nd * std::log1p(-p);
  if (i == n) return nd * std::log(p);
  const double y = nd - x;
  return stirling_error(nd) - stirling_error(x) - stirling_error(y) - deviance(x, nd * p) - deviance(y, nd * q) +
         0.5 * std::log(nd / (2.0 * std::numbers::pi * x * y));
}

// Sum of pmf(i) for i = k, k-1, ..., 0 assuming k lies below the mode.
double left_tail(Count k, Count n, double p) {
  double term = 1.0, sum = 1.0;
  for (Count i = k; i > 0; --i) {
    term *= static_cast<double>(i) * (1.0 - p) / (static_cast<double>(n - i + 1) * p);
    sum += term;
    if (term < kRelStop * sum) break;
  }
  return std::exp(log_pmf(k, n, p) + std::log(sum));
}

// Sum of pmf(i) for i = k, k+1, ..., n assuming k lies above the mode.
double right_tail(Count k, Count n, double p) {
  double term = 1.0, sum = 1.0;
  for (Count i = k; i < n; ++i) {
    term *= static_cast<double>(n - i) * p / (static_cast<double>(i + 1) * (1.0 - p));
    sum += term;
    if (term < kRelStop * sum) break;
  }
  return std::exp(log_pmf(k, n, p) + std::log(sum));
}

double mode_of(Count n, double p) { return std::floor((static_cast<double>(n) + 1.0) * p); }

}  // namespace

double log_binomial_coefficient(Count n, Count k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double binomial_cdf(Count k, Count n, double p) {
  if (k >= n || p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  if (static_cast<double>(k) < mode_of(n, p)) return std::min(1.0, left_tail(k, n, p));
  return std::clamp(1.0 - right_tail(k + 1, n, p), 0.0, 1.0);
}

double binomial_sf(Count k, Count n, double p) {
  if (k == 0) return 1.0;
  if (k > n || p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  if (static_cast<double>(k) > mode_of(n, p)) return std::min(1.0, right_tail(k, n, p));
  return std::clamp(1.0 - left_tail(k - 1, n, p), 0.0, 1.0);
}

namespace {

// Solves tail(p) = epsilon for a tail monotone in p, working in log p.
// Returns the bracket end on the side where tail <= epsilon.
template <typename Tail>
double solve_rate(Tail tail, double epsilon, double p_start, bool increasing) {
  const double log_eps = std::log(epsilon);
  auto f = [&](double x) {
    const double t = tail(std::exp(x));
    const double lt = t > 0.0 ? std::log(t) : -1e300;
    return lt - log_eps;
  };
  // Expand the bracket away from the point estimate until the sign changes.
  double a = std::log(p_start), b = a;
  double fa = f(a);
  const double step = 0.25;
  if (increasing) {
    // tail grows with p; need fa < 0 at a and fb > 0 at b
    double fb = fa;
    while (fb <= 0.0 && b < 0.0) {
      b = std::min(0.0, b + step);
      fb = f(b);
    }
    if (fb <= 0.0) return 1.0;
    if (fa >= 0.0) {
      double s = step;
      do {
        b = a;
        fb = fa;
        a -= s;
        s *= 2.0;
        fa = f(a);
      } while (fa >= 0.0 && a > -745.0);
      if (fa >= 0.0) return 0.0;
    }
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    return std::exp(r.first);
  }
  // decreasing: tail shrinks as p grows; need fa > 0 at a and fb < 0 at b
  double fb = fa;
  while (fb >= 0.0 && b < 0.0) {
    a = b;
    fa = fb;
    b = std::min(0.0, b + step);
    fb = f(b);
  }
  if (fb >= 0.0) return 1.0;
  if (fa <= 0.0) {
    double s = step;
    do {
      b = a;
      fb = fa;
      a -= s;
      s *= 2.0;
      fa = f(a);
    } while (fa <= 0.0 && a > -745.0);
  }
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  return std::exp(r.second);
}

}  // namespace

BinomialBound binomial_interval(Count k, Count n, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (k > n) throw std::invalid_argument("binomial_interval: k exceeds n");
  BinomialBound b{k, n, epsilon, 0.0, 1.0, false};
  if (n == 0) {
    b.degenerate = true;
    return b;
  }
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  if (k > 0) {
    b.lower = solve_rate([&](double p) { return binomial_sf(k, n, p); }, epsilon, rate, true);
    b.lower = std::min(b.lower, rate);
  }
  if (k < n) {
    const double start = std::max(rate, 1.0 / static_cast<double>(n));
    b.upper = solve_rate([&](double p) { return binomial_cdf(k, n, p); }, epsilon, start, false);
    b.upper = std::max(b.upper, rate);
  }
  return b;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

PoissonWeights poisson_weights(double mu, int cutoff) {
  if (!(mu >= 0.0) || cutoff < 0) throw std::invalid_argument("poisson_weights: bad arguments");
  PoissonWeights out;
  out.weights.resize(static_cast<std::size_t>(cutoff) + 1, 0.0);
  double term = std::exp(-mu);
  out.weights[0] = term;
  for (int n = 1; n <= cutoff; ++n) {
    term *= mu / n;
    out.weights[n] = term;
  }
  // Continue the series rather than using 1 - sum, which cancels badly.
  double tail = 0.0;
  for (int n = cutoff + 1; n < cutoff + 2000; ++n) {
    term *= mu / n;
    tail += term;
    if (term <= 1e-30 * (tail + 1e-300) || term == 0.0) break;
  }
  out.tail = tail;
  return out;
}

}  // namespace decoyqkd::stats
