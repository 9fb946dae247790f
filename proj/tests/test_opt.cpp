#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "decoyqkd/calibrate.hpp"
#include "decoyqkd/opt.hpp"
#include "decoyqkd/sim.hpp"

using namespace decoyqkd;
using namespace decoyqkd::opt;

namespace {

const sim::CalibrationResult& calibrated() {
  static const auto cal = sim::calibrate_to_paper(sim::reference_scheme(), sim::reference_model());
  return cal;
}

}  // namespace

TEST(SchemeSpace, WeakestLevelFollowsExtinctionRatio) {
  SchemeSpace space;
  const auto s = space.make(0.13, 0.57, 0.1, 0.2);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0].mu, 0.57 * std::pow(10.0, -2.35), 1e-15);
  EXPECT_NEAR(s[0].send_prob + s[1].send_prob + s[2].send_prob, 1.0, 1e-12);
  EXPECT_TRUE(space.admissible(0.13, 0.57, 0.1, 0.2));
  EXPECT_FALSE(space.admissible(0.6, 0.5, 0.1, 0.2));
  EXPECT_FALSE(space.admissible(0.13, 0.57, 0.5, 0.48));
}

TEST(Evaluate, NoDetectorMeansNoKey) {
  auto m = sim::reference_model();
  m.detector_efficiency = 0.0;
  m.fiber_length_km = 10.0;
  const auto e = evaluate_scheme(m, sim::reference_scheme(), 1e10);
  EXPECT_EQ(e.secret_tight, 0);
  EXPECT_EQ(e.secret_worst, 0);
}

TEST(Evaluate, WorstCaseNeverBeatsTight) {
  auto m = calibrated().model;
  for (double km : {10.0, 80.0, 135.0, 145.0}) {
    m.fiber_length_km = km;
    const auto e = evaluate_scheme(m, sim::reference_scheme(), calibrated().pulses);
    EXPECT_LE(e.secret_worst, e.secret_tight) << km;
    EXPECT_LE(e.b1_tight, e.b1_worst) << km;
  }
}

TEST(Optimize, BeatsTheReferenceSchemeAndEveryTraceEntry) {
  auto m = calibrated().model;
  m.fiber_length_km = 135.0;
  const double pulses = calibrated().pulses;
  const auto ref = evaluate_scheme(m, sim::reference_scheme(), pulses);
  const auto r = optimize_scheme(m, pulses);
  EXPECT_FALSE(r.zero_key);
  EXPECT_GE(r.best.score_tight, ref.score_tight);
  EXPECT_GE(r.best.secret_tight, ref.secret_tight);
  for (const auto& t : r.trace) EXPECT_LE(t.score, r.best.score_tight + 1e-9);
  EXPECT_EQ(static_cast<int>(r.trace.size()), r.evaluations);
  const auto& s = r.best.scheme;
  EXPECT_GT(s.signal().mu, 0.3);
  EXPECT_LT(s.signal().mu, 0.9);
  EXPECT_GT(s[1].mu, 0.03);
  EXPECT_LT(s[1].mu, 0.3);
  EXPECT_EQ(to_json(r)["kind"], "optimization");
}

TEST(Optimize, ShortLinkPrefersModerateSignal) {
  auto m = calibrated().model;
  m.fiber_length_km = 1.0;
  OptimizeOptions o;
  o.keep_trace = false;
  const auto r = optimize_scheme(m, 1e12, o);
  EXPECT_GT(r.best.scheme.signal().mu, 0.3);
  EXPECT_LT(r.best.scheme.signal().mu, 0.9);
}

TEST(Optimize, ThreadCountDoesNotChangeTheAnswer) {
  auto m = calibrated().model;
  m.fiber_length_km = 100.0;
  OptimizeOptions one, two;
  two.threads = 2;
  const auto a = optimize_scheme(m, 1e10, one), b = optimize_scheme(m, 1e10, two);
  EXPECT_EQ(a.best.scheme, b.best.scheme);
  EXPECT_EQ(a.best.secret_tight, b.best.secret_tight);
}

TEST(Optimize, BeyondRangeReportsZeroKey) {
  auto m = calibrated().model;
  m.fiber_length_km = 260.0;
  OptimizeOptions o;
  o.keep_trace = false;
  const auto r = optimize_scheme(m, calibrated().pulses, o);
  EXPECT_TRUE(r.zero_key);
  EXPECT_EQ(r.best.secret_tight, 0);
}

TEST(RangeCurve, FixedSchemeKeyFallsWithDistanceAndEndpointsAreOrdered) {
  CurveOptions o;
  o.scheme = sim::reference_scheme();
  std::vector<double> d;
  for (double km = 0; km <= 170; km += 10) d.push_back(km);
  const auto c = range_curve(calibrated().model, calibrated().pulses, d, o);
  ASSERT_EQ(c.points.size(), d.size());
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_LE(c.points[i].eval.secret_tight, c.points[i - 1].eval.secret_tight);
  }
  EXPECT_GE(c.range_tight_km, c.range_worst_km);
  EXPECT_GT(c.range_worst_km, 130.0);
  EXPECT_LT(c.range_tight_km, 170.0);

  std::istringstream csv(to_csv(c));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, curve_csv_header());
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, d.size());
}

TEST(RangeCurve, EndpointHasKeyJustInsideAndNoneJustOutside) {
  CurveOptions o;
  o.scheme = sim::reference_scheme();
  const auto& cal = calibrated();
  const double end = range_endpoint(cal.model, cal.pulses, 100.0, 200.0, false, o);
  auto m = cal.model;
  m.fiber_length_km = end - 0.05;
  EXPECT_GT(evaluate_scheme(m, o.scheme, cal.pulses).secret_tight, 0);
  m.fiber_length_km = end + 0.05;
  EXPECT_EQ(evaluate_scheme(m, o.scheme, cal.pulses).secret_tight, 0);
}
