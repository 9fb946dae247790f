#include "decoyqkd/opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "decoyqkd/sim.hpp"

namespace decoyqkd::opt {

namespace {

constexpr double kNoBound = -std::numeric_limits<double>::infinity();

// Runs f(i) for i in [0, n) on up to `threads` workers; results land by index.
template <typename F>
void parallel_for(std::size_t n, int threads, F f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Point {
  double mu1, mu2, p0, p1;
};


// Secret bits before flooring while the bracket is positive. Beyond that the
// mean bracket itself, which lies in [-1, 0) and unlike the bit count cannot
// be raised towards zero by starving the signal level.
double score(const PerBasis<keyrate::KeyBudget>& budgets) {
  double bits = 0.0, bracket = 0.0;
  for (const auto& k : budgets) {
    bits += std::max(0.0, static_cast<double>(k.n_sifted) * k.bracket);
    bracket += 0.5 * k.bracket;
  }
  return bits > 0.0 ? bits : std::min(bracket, 0.0) - 1e-12;
}

}  // namespace

Evaluation evaluate_scheme(const ChannelModel& model, const DecoyScheme& scheme, double pulses,
                           const EvaluateOptions& options) {
  Evaluation e;
  e.scheme = scheme;
  const auto tally = sim::expected_tally(model, scheme, pulses);
  const auto key = keyrate::compose_session(tally, scheme, options.confidence, options.compose);
  e.secret_tight = key.total_tight;
  e.secret_worst = key.total_worst;
  e.y1_lower = key.bounds.y1.y1_lower;
  e.b1_worst = 0.0;
  e.b1_tight = 0.0;
  bool defined = true;
  for (Basis b : kBases) {
    const auto& sp = key.bounds.single_photon[index(b)];
    defined &= sp.defined;
    e.b1_worst = std::max(e.b1_worst, sp.b1_upper_worst);
    e.b1_tight = std::max(e.b1_tight, sp.b1_upper_tight);
  }
  e.score_tight = score(key.tight);
  e.score_worst = score(key.worst);
  if (!defined) {
    e.score_tight = e.score_worst = kNoBound;
    e.b1_worst = e.b1_tight = 1.0;
  }
  return e;
}

DecoyScheme SchemeSpace::make(double mu1, double mu2, double p0, double p1) const {
  const double mu0 = mu2 * std::pow(10.0, -extinction_db / 10.0);
  return DecoyScheme({{mu0, p0}, {mu1, p1}, {mu2, 1.0 - p0 - p1}});
}

bool SchemeSpace::admissible(double mu1, double mu2, double p0, double p1) const {
  const double mu0 = mu2 * std::pow(10.0, -extinction_db / 10.0);
  return mu1 >= mu1_min && mu1 <= mu1_max && mu2 >= mu2_min && mu2 <= mu2_max && mu1 > mu0 &&
         mu1 < mu2 && p0 >= p_min && p1 >= p_min && 1.0 - p0 - p1 >= signal_p_min;
}

OptimizationResult optimize_scheme(const ChannelModel& model, double pulses, const OptimizeOptions& opt) {
  const auto& space = opt.space;
  OptimizationResult r;
  auto eval_at = [&](const Point& p) {
    return evaluate_scheme(model, space.make(p.mu1, p.mu2, p.p0, p.p1), pulses, opt.evaluate);
  };
  auto objective = [&](const Evaluation& e) { return opt.maximize_worst_case ? e.score_worst : e.score_tight; };
  auto record = [&](int stage, const Point& p, const Evaluation& e) {
    ++r.evaluations;
    if (opt.keep_trace) {
      r.trace.push_back({stage, p.mu1, p.mu2, p.p0, p.p1, objective(e),
                         opt.maximize_worst_case ? e.secret_worst : e.secret_tight});
    }
  };

  // Stage 0: coarse grid.
  std::vector<Point> grid;
  for (double mu2 : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 1.0})
    for (double mu1 : {0.03, 0.06, 0.1, 0.15, 0.2, 0.3})
      for (double p0 : {0.05, 0.1, 0.2, 0.3})
        for (double p1 : {0.1, 0.2, 0.3})
          if (space.admissible(mu1, mu2, p0, p1)) grid.push_back({mu1, mu2, p0, p1});
  std::vector<Evaluation> evals(grid.size());
  parallel_for(grid.size(), opt.threads, [&](std::size_t i) { evals[i] = eval_at(grid[i]); });
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    record(0, grid[i], evals[i]);
    if (objective(evals[i]) > objective(evals[best_i])) best_i = i;
  }
  Point best = grid[best_i];
  Evaluation best_eval = evals[best_i];

  // Stages 1-3: coordinate descent, halving the steps after each stage.
  double steps[4] = {0.02, 0.05, 0.025, 0.025};  // mu1, mu2, p0, p1
  for (int stage = 1; stage <= 3; ++stage) {
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps++ < 20) {
      improved = false;
      for (int c = 0; c < 4; ++c) {
        std::vector<Point> cand;
        for (double dir : {-1.0, 1.0}) {
          Point p = best;
          double* coord[4] = {&p.mu1, &p.mu2, &p.p0, &p.p1};
          *coord[c] += dir * steps[c];
          if (space.admissible(p.mu1, p.mu2, p.p0, p.p1)) cand.push_back(p);
        }
        std::vector<Evaluation> ce(cand.size());
        parallel_for(cand.size(), opt.threads, [&](std::size_t i) { ce[i] = eval_at(cand[i]); });
        for (std::size_t i = 0; i < cand.size(); ++i) {
          record(stage, cand[i], ce[i]);
          if (objective(ce[i]) > objective(best_eval) + 1e-9 * std::abs(objective(best_eval))) {
            best = cand[i];
            best_eval = ce[i];
            improved = true;
          }
        }
      }
    }
    for (double& s : steps) s *= 0.5;
  }
  r.best = best_eval;
  r.zero_key = (opt.maximize_worst_case ? best_eval.secret_worst : best_eval.secret_tight) == 0;
  return r;
}

namespace {

Evaluation evaluate_at(const ChannelModel& model, double pulses, double distance, const CurveOptions& opt) {
  ChannelModel m = model;
  m.fiber_length_km = distance;
  if (opt.optimize) return optimize_scheme(m, pulses, [&] {
                             auto o = opt.optimizer;
                             o.keep_trace = false;
                             return o;
                           }()).best;
  return evaluate_scheme(m, opt.scheme, pulses, opt.optimizer.evaluate);
}

bool positive(const Evaluation& e, bool worst_case) {
  return (worst_case ? e.secret_worst : e.secret_tight) > 0;
}

}  // namespace

double range_endpoint(const ChannelModel& model, double pulses, double near_km, double far_km,
                      bool worst_case, const CurveOptions& opt) {
  CurveOptions o = opt;
  o.optimizer.maximize_worst_case = worst_case;
  while (far_km - near_km > opt.endpoint_tolerance_km) {
    const double mid = 0.5 * (near_km + far_km);
    (positive(evaluate_at(model, pulses, mid, o), worst_case) ? near_km : far_km) = mid;
  }
  return near_km;
}

RangeCurve range_curve(const ChannelModel& model, double pulses, const std::vector<double>& d,
                       const CurveOptions& opt) {
  if (!std::is_sorted(d.begin(), d.end())) throw std::invalid_argument("range_curve: distances must increase");
  RangeCurve c;
  c.points.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) c.points[i] = {d[i], evaluate_at(model, pulses, d[i], opt)};

  for (bool worst : {false, true}) {
    double& range = worst ? c.range_worst_km : c.range_tight_km;
    std::size_t last = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (positive(c.points[i].eval, worst)) last = i;
    }
    if (last == d.size()) {
      range = 0.0;
      continue;
    }
    range = d[last];
    if (opt.refine_endpoints && last + 1 < d.size()) {
      range = range_endpoint(model, pulses, d[last], d[last + 1], worst, opt);
    }
  }
  return c;
}

std::string curve_csv_header() {
  return "distance_km,secret_tight,secret_worst,y1_lower,b1_worst,b1_tight,mu0,mu1,mu2,p0,p1,p2";
}

std::string to_csv(const RangeCurve& c) {
  std::ostringstream os;
  os.precision(10);
  os << curve_csv_header() << '\n';
  for (const auto& p : c.points) {
    const auto& e = p.eval;
    os << p.distance_km << ',' << e.secret_tight << ',' << e.secret_worst << ',' << e.y1_lower << ','
       << e.b1_worst << ',' << e.b1_tight;
    for (const auto& l : e.scheme.levels()) os << ',' << l.mu;
    for (const auto& l : e.scheme.levels()) os << ',' << l.send_prob;
    os << '\n';
  }
  return os.str();
}

Json to_json(const OptimizationResult& r) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "optimization";
  j["scheme"] = to_json(r.best.scheme);
  j["secret_tight"] = r.best.secret_tight;
  j["secret_worst_case"] = r.best.secret_worst;
  j["y1_lower"] = r.best.y1_lower;
  j["b1_upper_worst"] = r.best.b1_worst;
  j["b1_upper_tight"] = r.best.b1_tight;
  j["zero_key"] = r.zero_key;
  j["evaluations"] = r.evaluations;
  Json t = Json::array();
  for (const auto& e : r.trace) {
    t.push_back(Json{{"stage", e.stage}, {"mu1", e.mu1}, {"mu2", e.mu2}, {"p0", e.p0}, {"p1", e.p1},
                     {"score", std::isfinite(e.score) ? Json(e.score) : Json(nullptr)},
                     {"secret", e.secret}});
  }
  j["trace"] = t;
  return j;
}

}  // namespace decoyqkd::opt
