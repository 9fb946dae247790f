#pragma once

// Independent reference solvers for the decoy linear programs. They share no
// code with the simplex implementation and are only practical for tiny
// systems (photon cutoff <= 4).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "decoyqkd/decoy.hpp"

namespace oracle {

using decoyqkd::decoy::ConstraintRows;

inline double row_value(const std::vector<double>& w, const double* v) {
  double s = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) s += w[n] * v[n];
  return s;
}

// Row j holds within `slack`.
inline bool rows_hold(const ConstraintRows& r, const double* v, double grid_step) {
  for (std::size_t j = 0; j < r.levels(); ++j) {
    double abs_sum = 0.0;
    for (double c : r.weights[j]) abs_sum += std::abs(c);
    const double slack = 0.5 * grid_step * abs_sum;
    const double x = row_value(r.weights[j], v);
    if (x > r.upper[j] + slack || x < r.lower[j] - r.tail[j] - slack) return false;
  }
  return true;
}

// Visits every point of the uniform grid {0, h, ..., 1}^dims.
inline void for_each_grid_point(int dims, int steps, const std::function<void(const double*)>& f) {
  std::vector<int> idx(dims, 0);
  std::vector<double> v(dims, 0.0);
  const double h = 1.0 / steps;
  while (true) {
    for (int d = 0; d < dims; ++d) v[d] = idx[d] * h;
    f(v.data());
    int d = 0;
    while (d < dims && ++idx[d] > steps) idx[d++] = 0;
    if (d == dims) return;
  }
}

struct GridBracket {
  double strict = std::numeric_limits<double>::quiet_NaN();   // over exactly feasible grid points
  double relaxed = std::numeric_limits<double>::quiet_NaN();  // over points within half a cell
  double step = 0.0;
  long feasible_points = 0;
};

/// min y_1 over the yield polytope, evaluated on a grid. The true minimum m
/// satisfies relaxed - step/2 <= m <= strict.
inline GridBracket grid_min_y1(const ConstraintRows& sys, int steps) {
  GridBracket g;
  g.step = 1.0 / steps;
  double strict = INFINITY, relaxed = INFINITY;
  const int dims = static_cast<int>(sys.photon_terms());
  for_each_grid_point(dims, steps, [&](const double* y) {
    if (rows_hold(sys, y, g.step)) {
      relaxed = std::min(relaxed, y[1]);
      if (rows_hold(sys, y, 0.0)) {
        strict = std::min(strict, y[1]);
        ++g.feasible_points;
      }
    }
  });
  if (std::isfinite(strict)) g.strict = strict;
  if (std::isfinite(relaxed)) g.relaxed = relaxed;
  return g;
}

/// max e_1 / y_1 over the joint polytope with y_1 >= y1_lower and the vacuum
/// error pinned at y_0 / 2, on a grid over (y_0..y_k, e_1..e_k). The true
/// maximum t satisfies strict <= t and t <= relaxed + (1 + relaxed) * step / (2 y1_lower - step).
inline GridBracket grid_max_b1(const ConstraintRows& ys, const ConstraintRows& es, double y1_lower, int steps) {
  GridBracket g;
  g.step = 1.0 / steps;
  const int k = static_cast<int>(ys.photon_terms());
  double strict = -INFINITY, relaxed = -INFINITY;
  std::vector<double> e(k);
  for_each_grid_point(2 * k - 1, steps, [&](const double* v) {
    const double* y = v;
    e[0] = 0.5 * y[0];
    for (int n = 1; n < k; ++n) e[n] = v[k + n - 1];
    if (y[1] <= 0.0) return;
    for (int pass = 0; pass < 2; ++pass) {
      const double h = pass == 0 ? g.step : 0.0;
      if (y[1] < y1_lower - 0.5 * h) return;
      for (int n = 1; n < k; ++n) {
        if (e[n] > y[n] + h) return;
      }
      // e_0 sits exactly on y_0 / 2, so its rows need half the slack.
      if (!rows_hold(ys, y, h) || !rows_hold(es, e.data(), h)) return;
      const double ratio = e[1] / y[1];
      if (pass == 0) {
        relaxed = std::max(relaxed, ratio);
      } else {
        strict = std::max(strict, ratio);
        ++g.feasible_points;
      }
    }
  });
  if (std::isfinite(strict)) g.strict = strict;
  if (std::isfinite(relaxed)) g.relaxed = relaxed;
  return g;
}

/// min y_1 over the yield polytope by enumerating every vertex: each choice
/// of `dims` constraints taken as equalities, solved densely, kept when
/// feasible.
inline double vertex_min_y1(const ConstraintRows& sys) {
  const int dims = static_cast<int>(sys.photon_terms());
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (std::size_t j = 0; j < sys.levels(); ++j) {
    planes.push_back({sys.weights[j], sys.upper[j]});
    planes.push_back({sys.weights[j], sys.lower[j] - sys.tail[j]});
  }
  for (int n = 0; n < dims; ++n) {
    std::vector<double> a(dims, 0.0);
    a[n] = 1.0;
    planes.push_back({a, 0.0});
    planes.push_back({a, 1.0});
  }
  auto feasible = [&](const Eigen::VectorXd& y) {
    for (int n = 0; n < dims; ++n) {
      if (y[n] < -1e-9 || y[n] > 1.0 + 1e-9) return false;
    }
    for (std::size_t j = 0; j < sys.levels(); ++j) {
      double s = 0.0;
      for (int n = 0; n < dims; ++n) s += sys.weights[j][n] * y[n];
      const double tol = 1e-9 * std::max(1.0, std::abs(sys.upper[j]));
      if (s > sys.upper[j] + tol || s < sys.lower[j] - sys.tail[j] - tol) return false;
    }
    return true;
  };
  double best = INFINITY;
  const int m = static_cast<int>(planes.size());
  std::vector<int> pick(dims);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == dims) {
      Eigen::MatrixXd A(dims, dims);
      Eigen::VectorXd b(dims);
      for (int r = 0; r < dims; ++r) {
        for (int c = 0; c < dims; ++c) A(r, c) = planes[pick[r]].a[c];
        b[r] = planes[pick[r]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < dims) return;
      const Eigen::VectorXd y = lu.solve(b);
      if (feasible(y)) best = std::min(best, y[1]);
      return;
    }
    for (int i = start; i <= m - (dims - depth); ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}

/// Random small system built around a hidden feasible point, so the
/// polytope is never empty and usually has volume.
struct RandomSystem {
  ConstraintRows yields;
  ConstraintRows errors;
  std::vector<double> y_true;
  std::vector<double> e_true;
};

inline RandomSystem random_system(std::mt19937_64& rng, int cutoff, int levels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomSystem s;
  const int k = cutoff + 1;
  s.y_true.resize(k);
  s.e_true.resize(k);
  for (int n = 0; n < k; ++n) {
    s.y_true[n] = n == 0 ? 0.05 + 0.2 * u(rng) : std::min(1.0, 0.3 + 0.7 * u(rng) * n / cutoff + 0.1 * n);
    s.e_true[n] = n == 0 ? 0.5 * s.y_true[0] : s.y_true[n] * 0.3 * u(rng);
  }
  std::vector<double> mu;
  double m = 0.05 + 0.1 * u(rng);
  for (int j = 0; j < levels; ++j) {
    mu.push_back(m);
    m += 0.2 + 0.4 * u(rng);
  }
  std::vector<double> ylo, yhi, elo, ehi;
  for (double mj : mu) {
    const auto w = decoyqkd::stats::poisson_weights(mj, cutoff);
    double Y = 0.0, E = 0.0;
    for (int n = 0; n < k; ++n) {
      Y += w.weights[n] * s.y_true[n];
      E += w.weights[n] * s.e_true[n];
    }
    const double wy = 0.01 + 0.04 * u(rng), we = 0.005 + 0.02 * u(rng);
    ylo.push_back(std::max(0.0, Y - wy));
    yhi.push_back(Y + wy);
    elo.push_back(std::max(0.0, E - we));
    ehi.push_back(E + we);
  }
  s.yields = ConstraintRows::build(mu, ylo, yhi, cutoff);
  s.errors = ConstraintRows::build(mu, elo, ehi, cutoff);
  return s;
}

}  // namespace oracle
