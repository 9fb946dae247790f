#include "decoyqkd/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace decoyqkd::sim {

LinkBudget link_budget(const ChannelModel& m) {
  m.validate();
  LinkBudget b;
  b.total_loss_db = m.attenuation_db_per_km * m.fiber_length_km;
  b.eta = m.detector_efficiency * std::pow(10.0, -b.total_loss_db / 10.0);
  b.dark_prob_per_window = std::min(1.0, (m.dark_rate_hz + m.background_rate_hz) * m.timing_window_s);
  return b;
}

std::vector<LevelExpectation> expected_statistics(const ChannelModel& m, const DecoyScheme& scheme) {
  const auto link = link_budget(m);
  const double pd = link.dark_prob_per_window;
  std::vector<LevelExpectation> out;
  for (const auto& l : scheme.levels()) {
    const double signal = -std::expm1(-link.eta * l.mu);
    LevelExpectation e;
    e.yield = pd + (1.0 - pd) * signal;
    e.error_rate = e.yield > 0.0 ? (0.5 * pd + m.intrinsic_error * signal) / e.yield : 0.5;
    out.push_back(e);
  }
  return out;
}

namespace {

// 1 - (1 - eta)^n without cancellation at small eta.
double arrival_probability(const LinkBudget& link, int n) {
  return -std::expm1(n * std::log1p(-link.eta));
}

}  // namespace

double photon_yield(const LinkBudget& link, int n) {
  const double pd = link.dark_prob_per_window;
  return pd + (1.0 - pd) * arrival_probability(link, n);
}

double photon_error_rate(const LinkBudget& link, double intrinsic_error, int n) {
  const double y = photon_yield(link, n);
  if (y <= 0.0) return 0.5;
  const double signal = arrival_probability(link, n);
  return (0.5 * link.dark_prob_per_window + intrinsic_error * signal) / y;
}

SessionTally expected_tally(const ChannelModel& m, const DecoyScheme& scheme, double pulses) {
  if (!(pulses >= 0.0)) throw std::invalid_argument("expected_tally: pulses must be >= 0");
  const auto stats = expected_statistics(m, scheme);
  auto round_count = [](double x) { return static_cast<Count>(std::llround(x)); };
  SessionTally t;
  t.reconstructed = true;
  for (std::size_t j = 0; j < scheme.size(); ++j) {
    const double sent = std::round(pulses * scheme[j].send_prob);
    const double det = sent * stats[j].yield;
    LevelTally l;
    l.sent = round_count(sent);
    for (Basis b : kBases) {
      l.detected[index(b)] = round_count(det / 2.0);
      l.sifted[index(b)] = round_count(det / 4.0);
      l.errors[index(b)] = std::min(l.sifted[index(b)], round_count(det / 4.0 * stats[j].error_rate));
    }
    t.levels.push_back(l);
  }
  for (Basis b : kBases) {
    t.zeros[index(b)] = round_count(static_cast<double>(t.sifted_in(b)) * m.zero_fraction);
  }
  return t;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unif{0.0, 1.0};

  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  bool coin(double p) { return unif(rng) < p; }
  Count binomial(Count n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<Count>(n, p)(rng);
  }
};

// Records one detection with known error probability.
void record(SimulatedSession& s, std::size_t level, bool signal_level, double error_prob,
            double zero_fraction, bool keep_keys, Sampler& rng) {
  const Basis bob_basis = rng.coin(0.5) ? Basis::Z : Basis::X;
  const Basis alice_basis = rng.coin(0.5) ? Basis::Z : Basis::X;
  auto& l = s.tally.levels[level];
  const auto bi = index(bob_basis);
  ++l.detected[bi];
  if (alice_basis != bob_basis) return;
  ++l.sifted[bi];
  const std::uint8_t alice_bit = rng.coin(zero_fraction) ? 0 : 1;
  const bool error = rng.coin(error_prob);
  if (error) ++l.errors[bi];
  if (alice_bit == 0) ++s.tally.zeros[bi];
  if (signal_level && keep_keys) {
    s.alice[bi].push_back(alice_bit);
    s.bob[bi].push_back(static_cast<std::uint8_t>(alice_bit ^ (error ? 1 : 0)));
  }
}

}  // namespace

SimulatedSession simulate_session(const ChannelModel& m, const DecoyScheme& scheme, Count pulses,
                                  std::uint64_t seed, const SimulationOptions& opt) {
  const auto link = link_budget(m);
  const double pd = link.dark_prob_per_window;
  const std::size_t signal = scheme.signal_index();
  Sampler rng(seed);
  SimulatedSession s;
  s.tally.levels.resize(scheme.size());

  if (pulses <= opt.per_pulse_limit) {
    std::vector<double> probs;
    for (const auto& l : scheme.levels()) probs.push_back(l.send_prob);
    std::discrete_distribution<std::size_t> pick_level(probs.begin(), probs.end());
    std::vector<std::poisson_distribution<int>> photons;
    for (const auto& l : scheme.levels()) photons.emplace_back(l.mu > 0.0 ? l.mu : 1e-300);
    for (Count i = 0; i < pulses; ++i) {
      const std::size_t j = pick_level(rng.rng);
      ++s.tally.levels[j].sent;
      const int n = scheme[j].mu > 0.0 ? photons[j](rng.rng) : 0;
      const bool arrived = n > 0 && rng.binomial(static_cast<Count>(n), link.eta) > 0;
      const bool dark = rng.coin(pd);
      if (!arrived && !dark) continue;
      const double error_prob = (arrived && !dark) ? m.intrinsic_error : 0.5;
      record(s, j, j == signal, error_prob, m.zero_fraction, opt.keep_keys, rng);
    }
    return s;
  }

  const auto stats = expected_statistics(m, scheme);
  Count remaining = pulses;
  double mass = 1.0;
  for (std::size_t j = 0; j < scheme.size(); ++j) {
    const Count sent = j + 1 == scheme.size() ? remaining
                                              : rng.binomial(remaining, std::min(1.0, scheme[j].send_prob / mass));
    remaining -= sent;
    mass -= scheme[j].send_prob;
    auto& l = s.tally.levels[j];
    l.sent = sent;
    const Count det = rng.binomial(sent, stats[j].yield);
    if (j == signal && opt.keep_keys) {
      for (Count d = 0; d < det; ++d) {
        record(s, j, true, stats[j].error_rate, m.zero_fraction, true, rng);
      }
      continue;
    }
    const Count det_x = rng.binomial(det, 0.5);
    l.detected = {det_x, det - det_x};
    for (Basis b : kBases) {
      const auto bi = index(b);
      l.sifted[bi] = rng.binomial(l.detected[bi], 0.5);
      l.errors[bi] = rng.binomial(l.sifted[bi], stats[j].error_rate);
      s.tally.zeros[bi] += rng.binomial(l.sifted[bi], m.zero_fraction);
    }
  }
  return s;
}

DecoyScheme reference_scheme() { return DecoyScheme({{0.0025, 0.1}, {0.13, 0.2}, {0.57, 0.7}}); }

ChannelModel reference_model() {
  ChannelModel m;
  m.fiber_length_km = 135.0;
  m.zero_fraction = 0.494;
  return m;
}

}  // namespace decoyqkd::sim
