#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace decoyqkd::lp {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
  std::vector<double> coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// maximize objective·x subject to the constraints and lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit LinearProgram(std::size_t num_vars = 0)
      : objective(num_vars, 0.0),
        lower(num_vars, 0.0),
        upper(num_vars, std::numeric_limits<double>::infinity()) {}

  std::size_t num_vars() const { return objective.size(); }
  void add(std::vector<double> coefficients, Relation rel, double rhs) {
    constraints.push_back({std::move(coefficients), rel, rhs});
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status s);

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  std::vector<std::size_t> active;  // indices of constraints holding with equality
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-11;
  int max_iterations = 20000;
};

/// Two-phase dense simplex. Rows are equilibrated before solving, so callers
/// should pass problems whose variables are on comparable scales.
Solution solve(const LinearProgram& problem, const SolverOptions& options = {});

}  // namespace decoyqkd::lp
