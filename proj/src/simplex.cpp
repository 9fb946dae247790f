#include "decoyqkd/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decoyqkd::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * (cols_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, cols_); }
  double& cost(std::size_t j) { return at(rows_, j); }  // reduced cost row
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  // Sets the reduced-cost row for maximizing `c` over the current basis.
  void load_objective(const std::vector<double>& c) {
    for (std::size_t j = 0; j <= cols_; ++j) cost(j) = j < cols_ ? c[j] : 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) cost(j) -= cb * at(i, j);
    }
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

// Runs primal simplex iterations on the loaded objective. Columns with
// `allowed[j] == false` never enter the basis.
Status iterate(Tableau& t, const std::vector<bool>& allowed, const SolverOptions& opt, int& iters) {
  int degenerate_run = 0;
  while (iters < opt.max_iterations) {
    const bool bland = degenerate_run > 50;
    std::size_t enter = t.cols();
    double best = opt.pivot_tol;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (!allowed[j]) continue;
      const double d = t.cost(j);
      if (d > best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter == t.cols()) return Status::Optimal;

    std::size_t leave = t.rows();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= opt.pivot_tol) continue;
      const double r = std::max(0.0, t.rhs(i)) / a;
      if (r < ratio - 1e-15 || (r <= ratio + 1e-15 && leave < t.rows() &&
                                t.basis()[i] < t.basis()[leave])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave == t.rows()) return Status::Unbounded;
    degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
    t.pivot(leave, enter);
    ++iters;
  }
  return Status::IterationLimit;
}

}  // namespace

Solution solve(const LinearProgram& lp, const SolverOptions& opt) {
  const std::size_t n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n) {
    throw std::invalid_argument("lp::solve: bound vectors must match the variable count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower[j])) throw std::invalid_argument("lp::solve: lower bounds must be finite");
    if (lp.upper[j] < lp.lower[j]) {
      Solution s;
      s.status = Status::Infeasible;
      return s;
    }
  }

  // Rows in shifted variables x' = x - lower, with finite upper bounds as rows.
  struct Row {
    std::vector<double> a;
    Relation rel;
    double b;
  };
  std::vector<Row> rows;
  rows.reserve(lp.constraints.size() + n);
  for (const auto& c : lp.constraints) {
    if (c.coefficients.size() != n) throw std::invalid_argument("lp::solve: constraint width mismatch");
    double b = c.rhs;
    for (std::size_t j = 0; j < n; ++j) b -= c.coefficients[j] * lp.lower[j];
    rows.push_back({c.coefficients, c.relation, b});
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lp.upper[j])) {
      std::vector<double> a(n, 0.0);
      a[j] = 1.0;
      rows.push_back({std::move(a), Relation::LessEqual, lp.upper[j] - lp.lower[j]});
    }
  }
  for (auto& r : rows) {
    double scale = 0.0;
    for (double v : r.a) scale = std::max(scale, std::abs(v));
    if (scale > 0.0) {
      for (double& v : r.a) v /= scale;
      r.b /= scale;
    } else if ((r.rel == Relation::LessEqual && r.b < -opt.feasibility_tol) ||
               (r.rel == Relation::GreaterEqual && r.b > opt.feasibility_tol) ||
               (r.rel == Relation::Equal && std::abs(r.b) > opt.feasibility_tol)) {
      Solution s;
      s.status = Status::Infeasible;
      return s;
    }
    if (r.b < 0.0) {
      for (double& v : r.a) v = -v;
      r.b = -r.b;
      if (r.rel == Relation::LessEqual) r.rel = Relation::GreaterEqual;
      else if (r.rel == Relation::GreaterEqual) r.rel = Relation::LessEqual;
    }
  }

  const std::size_t m = rows.size();
  std::size_t num_slack = 0, num_art = 0;
  for (const auto& r : rows) {
    if (r.rel != Relation::Equal) ++num_slack;
    if (r.rel != Relation::LessEqual) ++num_art;
  }
  const std::size_t slack0 = n, art0 = n + num_slack, cols = n + num_slack + num_art;
  Tableau t(m, cols);
  std::size_t s = slack0, a = art0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = rows[i];
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = r.a[j];
    t.rhs(i) = r.b;
    if (r.rel == Relation::LessEqual) {
      t.at(i, s) = 1.0;
      t.basis()[i] = s++;
    } else {
      if (r.rel == Relation::GreaterEqual) t.at(i, s++) = -1.0;
      t.at(i, a) = 1.0;
      t.basis()[i] = a++;
    }
  }

  Solution sol;
  int iters = 0;
  std::vector<bool> allowed(cols, true);
  if (num_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = art0; j < cols; ++j) phase1[j] = -1.0;
    t.load_objective(phase1);
    const auto st = iterate(t, allowed, opt, iters);
    if (st == Status::IterationLimit) {
      sol.status = st;
      sol.iterations = iters;
      return sol;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] >= art0) infeas += t.rhs(i);
    }
    if (infeas > opt.feasibility_tol) {
      sol.status = Status::Infeasible;
      sol.iterations = iters;
      return sol;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < art0) continue;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(t.at(i, j)) > 1e-9) {
          t.pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;
  }

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.objective[j];
  t.load_objective(phase2);
  sol.status = iterate(t, allowed, opt, iters);
  sol.iterations = iters;
  if (sol.status != Status::Optimal) return sol;

  sol.x.assign(lp.lower.begin(), lp.lower.end());
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = t.basis()[i];
    if (j < n) sol.x[j] += std::max(0.0, t.rhs(i));
  }
  for (std::size_t j = 0; j < n; ++j) {
    sol.x[j] = std::min(sol.x[j], lp.upper[j]);
    sol.objective += lp.objective[j] * sol.x[j];
  }
  for (std::size_t k = 0; k < lp.constraints.size(); ++k) {
    const auto& c = lp.constraints[k];
    double lhs = 0.0, scale = std::abs(c.rhs);
    for (std::size_t j = 0; j < n; ++j) {
      lhs += c.coefficients[j] * sol.x[j];
      scale = std::max(scale, std::abs(c.coefficients[j] * sol.x[j]));
    }
    if (std::abs(lhs - c.rhs) <= 1e-9 * std::max(scale, 1e-300)) sol.active.push_back(k);
  }
  return sol;
}

}  // namespace decoyqkd::lp
