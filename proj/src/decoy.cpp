#include "decoyqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decoyqkd/simplex.hpp"

namespace decoyqkd::decoy {

namespace {

constexpr double kAchievableSlack = 1e-10;

double max_or_one(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m > 0.0 ? m : 1.0;
}

// Appends the two-sided rows of `rows`, acting on variables starting at
// `offset`, to `problem`. Returns one name per appended constraint.
std::vector<std::string> add_rows(lp::LinearProgram& problem, const ConstraintRows& rows,
                                  std::size_t offset, double scale, const std::string& label) {
  std::vector<std::string> names;
  const std::size_t width = problem.num_vars();
  for (std::size_t j = 0; j < rows.levels(); ++j) {
    std::vector<double> a(width, 0.0);
    std::copy(rows.weights[j].begin(), rows.weights[j].end(), a.begin() + offset);
    problem.add(a, lp::Relation::LessEqual, rows.upper[j] / scale);
    names.push_back(label + "[" + std::to_string(j) + "] upper");
    const double lo = rows.lower[j] - rows.tail[j];
    if (lo > 0.0) {
      problem.add(std::move(a), lp::Relation::GreaterEqual, lo / scale);
      names.push_back(label + "[" + std::to_string(j) + "] lower");
    }
  }
  return names;
}

std::vector<std::string> pick(const std::vector<std::string>& names,
                              const std::vector<std::size_t>& active) {
  std::vector<std::string> out;
  for (auto k : active) {
    if (k < names.size()) out.push_back(names[k]);
  }
  return out;
}

std::vector<double> level_mus(const DecoyScheme& scheme) {
  std::vector<double> mu;
  for (const auto& l : scheme.levels()) mu.push_back(l.mu);
  return mu;
}

}  // namespace

ConstraintRows ConstraintRows::build(const std::vector<double>& mu, std::vector<double> lower,
                                     std::vector<double> upper, int cutoff) {
  if (lower.size() != mu.size() || upper.size() != mu.size()) {
    throw std::invalid_argument("constraint rows: bound vectors must match the level count");
  }
  if (cutoff < 1) throw std::invalid_argument("constraint rows: cutoff must be >= 1");
  ConstraintRows r;
  r.mu = mu;
  r.lower = std::move(lower);
  r.upper = std::move(upper);
  for (double m : mu) {
    auto w = stats::poisson_weights(m, cutoff);
    r.weights.push_back(std::move(w.weights));
    r.tail.push_back(w.tail);
  }
  return r;
}

namespace {

stats::BinomialBound interval(Count k, Count n, const ConfidenceConfig& cfg) {
  if (!cfg.asymptotic || n == 0) return stats::binomial_interval(k, n, cfg.epsilon);
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  return {k, n, cfg.epsilon, rate, rate, false};
}

}  // namespace

std::vector<stats::BinomialBound> yield_bounds(const SessionTally& tally, const DecoyScheme& scheme,
                                               const ConfidenceConfig& cfg) {
  validate_tally(tally, scheme);
  std::vector<stats::BinomialBound> out;
  for (const auto& l : tally.levels) {
    out.push_back(interval(l.detected_total(), l.sent, cfg));
  }
  return out;
}

Count matched_pulses(const LevelTally& level, Basis b) {
  const Count det = level.detected_total();
  const Count sifted = level.sifted[index(b)];
  if (det == 0) return level.sent / 4;
  const long double est =
      static_cast<long double>(level.sent) * static_cast<long double>(sifted) / static_cast<long double>(det);
  return std::max<Count>(sifted, static_cast<Count>(std::llround(est)));
}

std::vector<stats::BinomialBound> error_bounds(const SessionTally& tally, const DecoyScheme& scheme,
                                               const ConfidenceConfig& cfg, Basis b) {
  validate_tally(tally, scheme);
  std::vector<stats::BinomialBound> out;
  for (const auto& l : tally.levels) {
    out.push_back(interval(l.errors[index(b)], matched_pulses(l, b), cfg));
  }
  return out;
}

YieldConstraintSystem make_yield_system(const DecoyScheme& scheme,
                                        const std::vector<stats::BinomialBound>& yield, int cutoff) {
  std::vector<double> lo, hi;
  for (const auto& b : yield) {
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  return {ConstraintRows::build(level_mus(scheme), lo, hi, cutoff)};
}

ErrorConstraintSystem make_error_system(const DecoyScheme& scheme,
                                        const std::vector<stats::BinomialBound>& error, int cutoff) {
  std::vector<double> lo, hi;
  for (const auto& b : error) {
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  return {ConstraintRows::build(level_mus(scheme), lo, hi, cutoff)};
}

Y1Result solve_y1_lower(const YieldConstraintSystem& sys) {
  const std::size_t k = sys.photon_terms();
  if (sys.levels() == 0 || k < 2) throw std::invalid_argument("solve_y1_lower: empty system");
  // Work in units of the largest observed yield so that coefficients and
  // right-hand sides are of order one.
  const double s = max_or_one(sys.upper);
  lp::LinearProgram p(k);
  std::fill(p.upper.begin(), p.upper.end(), 1.0 / s);
  p.objective[1] = -1.0;
  const auto names = add_rows(p, sys, 0, s, "Y");
  const auto sol = lp::solve(p);
  Y1Result r;
  r.lp_iterations = sol.iterations;
  if (sol.status != lp::Status::Optimal) return r;
  r.feasible = true;
  r.y1_lower = std::clamp(sol.x[1] * s, 0.0, 1.0);
  r.active = pick(names, sol.active);
  return r;
}

WorstCaseResult b1_worst_case(const SessionTally& tally, double y1_lower, const DecoyScheme& scheme,
                              Basis b) {
  if (tally.levels.size() != scheme.size()) {
    throw std::invalid_argument("b1_worst_case: tally and scheme level counts differ");
  }
  WorstCaseResult r;
  r.errors = tally.errors_in(b);
  for (std::size_t j = 0; j < scheme.size(); ++j) {
    const double mu = scheme[j].mu;
    r.n1_lower += static_cast<double>(matched_pulses(tally.levels[j], b)) * mu * std::exp(-mu) * y1_lower;
  }
  r.defined = y1_lower > 0.0 && r.n1_lower > 0.0;
  if (!r.defined) return r;
  r.b1_upper = std::clamp(static_cast<double>(r.errors) / r.n1_lower, 0.0, 1.0);
  return r;
}

TightResult b1_tight(const YieldConstraintSystem& ys, const ErrorConstraintSystem& es, double y1_lower,
                     const DecoyOptions& opt) {
  const std::size_t k = ys.photon_terms();
  if (es.photon_terms() != k || es.levels() != ys.levels()) {
    throw std::invalid_argument("b1_tight: yield and error systems differ in shape");
  }
  TightResult r;
  r.defined = y1_lower > 0.0;
  if (!r.defined) return r;

  const double s = std::max(max_or_one(ys.upper), max_or_one(es.upper));
  lp::LinearProgram p(2 * k);
  std::fill(p.upper.begin(), p.upper.end(), 1.0 / s);
  p.lower[1] = std::min(y1_lower, 1.0) / s;
  auto names = add_rows(p, ys, 0, s, "Y");
  const auto enames = add_rows(p, es, k, s, "B");
  names.insert(names.end(), enames.begin(), enames.end());
  for (std::size_t n = 0; n < k; ++n) {
    std::vector<double> a(2 * k, 0.0);
    a[k + n] = 1.0;
    a[n] = -1.0;
    p.add(std::move(a), lp::Relation::LessEqual, 0.0);
    names.push_back("e[" + std::to_string(n) + "] <= y[" + std::to_string(n) + "]");
  }
  if (opt.pin_vacuum_error) {
    std::vector<double> a(2 * k, 0.0);
    a[k] = 1.0;
    a[0] = -0.5;
    p.add(std::move(a), lp::Relation::Equal, 0.0);
    names.push_back("e[0] = y[0] / 2");
  }

  // t is achievable when some feasible point has e_1 - t * y_1 >= 0.
  auto achievable = [&](double t, bool& feasible) {
    p.objective.assign(2 * k, 0.0);
    p.objective[k + 1] = 1.0;
    p.objective[1] = -t;
    const auto sol = lp::solve(p);
    ++r.lp_solves;
    feasible = sol.status == lp::Status::Optimal;
    if (feasible && sol.objective >= -kAchievableSlack) r.active = pick(names, sol.active);
    return feasible && sol.objective >= -kAchievableSlack;
  };

  bool feasible = false;
  achievable(0.0, feasible);
  if (!feasible) return r;
  r.feasible = true;
  if (achievable(1.0, feasible)) {
    r.b1_upper = 1.0;
    return r;
  }
  double lo = 0.0, hi = 1.0;
  while (hi - lo > opt.bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    (achievable(mid, feasible) ? lo : hi) = mid;
    ++r.bisection_iterations;
  }
  r.b1_upper = hi;
  return r;
}

BoundSet analyze(const SessionTally& tally, const DecoyScheme& scheme, const ConfidenceConfig& cfg,
                 const DecoyOptions& opt) {
  cfg.validate();
  validate_tally(tally, scheme);
  BoundSet out;
  out.reconstructed = tally.reconstructed;
  out.epsilon = cfg.epsilon;
  out.yield = yield_bounds(tally, scheme, cfg);
  const auto ys = make_yield_system(scheme, out.yield, cfg.photon_cutoff);
  out.y1 = solve_y1_lower(ys);
  out.bound_count = static_cast<int>(2 * scheme.size() * 3);
  for (Basis b : kBases) {
    const auto i = index(b);
    out.error[i] = error_bounds(tally, scheme, cfg, b);
    for (const auto& l : tally.levels) out.matched_pulses[i].push_back(matched_pulses(l, b));
    auto& sp = out.single_photon[i];
    sp.y1_lower = out.y1.y1_lower;
    sp.feasible = out.y1.feasible;
    if (!out.y1.feasible || out.y1.y1_lower <= 0.0) continue;
    out.worst[i] = b1_worst_case(tally, out.y1.y1_lower, scheme, b);
    const auto es = make_error_system(scheme, out.error[i], cfg.photon_cutoff);
    out.tight[i] = b1_tight(ys, es, out.y1.y1_lower, opt);
    sp.feasible = out.tight[i].feasible;
    sp.defined = out.worst[i].defined && out.tight[i].defined && out.tight[i].feasible;
    sp.n1_lower = out.worst[i].n1_lower;
    sp.b1_upper_worst = out.worst[i].b1_upper;
    sp.b1_upper_tight = std::min(out.tight[i].b1_upper, out.worst[i].b1_upper);
  }
  return out;
}

namespace {

Json bound_json(const stats::BinomialBound& b) {
  Json j{{"observed", b.observed}, {"trials", b.trials}, {"lower", b.lower}, {"upper", b.upper}};
  if (b.degenerate) j["degenerate"] = true;
  return j;
}

}  // namespace

Json to_json(const BoundSet& bs) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "bound_set";
  j["reconstructed"] = bs.reconstructed;
  j["epsilon_per_bound"] = bs.epsilon;
  j["total_failure_probability"] = bs.epsilon * bs.bound_count;
  j["yield"] = Json::array();
  for (const auto& b : bs.yield) j["yield"].push_back(bound_json(b));
  j["y1_lower"] = bs.y1.y1_lower;
  j["y1_search"] = {{"feasible", bs.y1.feasible},
                    {"lp_iterations", bs.y1.lp_iterations},
                    {"active_constraints", bs.y1.active}};
  for (Basis b : kBases) {
    const auto i = index(b);
    Json e = Json::array();
    for (std::size_t l = 0; l < bs.error[i].size(); ++l) {
      auto eb = bound_json(bs.error[i][l]);
      eb["matched_pulses"] = bs.matched_pulses[i][l];
      e.push_back(eb);
    }
    const auto& sp = bs.single_photon[i];
    j["bases"][to_string(b)] = {
        {"error_yield", e},
        {"defined", sp.defined},
        {"feasible", sp.feasible},
        {"single_photon_matched_lower", sp.n1_lower},
        {"b1_upper_worst", sp.b1_upper_worst},
        {"b1_upper_tight", sp.b1_upper_tight},
        {"tight_search",
         {{"bisection_iterations", bs.tight[i].bisection_iterations},
          {"lp_solves", bs.tight[i].lp_solves},
          {"unclipped_upper", bs.tight[i].b1_upper},
          {"active_constraints", bs.tight[i].active}}}};
  }
  return j;
}

}  // namespace decoyqkd::decoy
