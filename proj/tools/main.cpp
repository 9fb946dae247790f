// decoyqkd: simulate, analyze, distill, optimize, curve and calibrate.
//
// Exit status: 0 on success, 1 on bad input, 2 when the run completed but
// produced no key (or the bounds were infeasible).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "decoyqkd/calibrate.hpp"
#include "decoyqkd/decoy.hpp"
#include "decoyqkd/extract.hpp"
#include "decoyqkd/json_io.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/opt.hpp"
#include "decoyqkd/recon.hpp"
#include "decoyqkd/sim.hpp"
#include "inputs.hpp"

using namespace decoyqkd;
using decoyqkd::cli::Inputs;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNoKey = 2;

constexpr double kReferenceHours = 5.6;

struct Settings {
  std::string config;
  std::string model_path;
  std::string scheme_path;
  std::string out = "-";

  std::optional<double> distance_km;
  std::optional<double> detector_efficiency;
  std::optional<double> intrinsic_error;

  std::optional<double> epsilon;
  std::optional<int> cutoff;
  bool asymptotic = false;

  std::optional<double> pulses;
  std::optional<double> duration_h;
  std::optional<double> duty_cycle;

  double f_ec = 1.07;
  double f_ds = 1.05;
  bool worst_case = false;
  int threads = 1;
  std::uint64_t seed = 1;
};

/// Everything a subcommand needs once files and flags are merged.
struct Context {
  Inputs inputs;
  ChannelModel model = sim::reference_model();
  DecoyScheme scheme = sim::reference_scheme();
  ConfidenceConfig confidence;
  cli::Acquisition acquisition;
};

void add_output(CLI::App* sub, Settings& s) {
  sub->add_option("-o,--out", s.out, "Output file for the machine-readable result ('-' is standard output)")
      ->capture_default_str();
}

void add_config(CLI::App* sub, Settings& s) {
  sub->add_option("--config", s.config,
                  "Session bundle (model, scheme, confidence, acquisition); see configs/paper.json");
}

void add_model(CLI::App* sub, Settings& s) {
  sub->add_option("--model", s.model_path, "Channel model JSON (or a bundle holding one)");
  sub->add_option("--distance-km", s.distance_km, "Fiber length; overrides the model (reference 135)");
  sub->add_option("--detector-efficiency", s.detector_efficiency,
                  "Detector efficiency; overrides the model (reference 0.005)");
  sub->add_option("--intrinsic-error", s.intrinsic_error,
                  "Intrinsic error rate; overrides the model (reference 0)");
}

void add_scheme(CLI::App* sub, Settings& s) {
  sub->add_option("--scheme", s.scheme_path,
                  "Decoy scheme JSON (or a bundle holding one); default mu = 0.0025/0.13/0.57, p = 0.1/0.2/0.7");
}

void add_confidence(CLI::App* sub, Settings& s) {
  sub->add_option("--confidence", s.epsilon, "Failure probability of each binomial bound (default 1e-7)")
      ->check(CLI::Range(1e-300, 0.5));
  sub->add_option("--cutoff", s.cutoff, "Photon-number cutoff of the decoy programs (default 10)")
      ->check(CLI::Range(1, 60));
  sub->add_flag("--asymptotic", s.asymptotic, "Infinite-data limit: no statistical fluctuations");
}

void add_volume(CLI::App* sub, Settings& s) {
  auto* pulses = sub->add_option("--pulses", s.pulses, "Total number of pulses sent")->check(CLI::NonNegativeNumber);
  sub->add_option("--duration-h", s.duration_h,
                  "Acquisition time in hours; pulses = hours * 3600 * clock rate * duty cycle")
      ->check(CLI::NonNegativeNumber)
      ->excludes(pulses);
  sub->add_option("--duty-cycle", s.duty_cycle, "Fraction of clock slots carrying pulses (default from config, else 1)")
      ->check(CLI::Range(0.0, 1.0));
}

void add_factors(CLI::App* sub, Settings& s) {
  sub->add_option("--f-ec", s.f_ec, "Error-correction inefficiency")->capture_default_str()->check(CLI::Range(1.0, 10.0));
  sub->add_option("--f-ds", s.f_ds, "Deskewing inefficiency")->capture_default_str()->check(CLI::Range(1.0, 10.0));
}

Context build_context(const Settings& s) {
  Context c;
  if (!s.config.empty()) {
    const auto bundle = c.inputs.load("config", s.config);
    if (bundle.contains("model")) c.model = c.inputs.model(s.config);
    if (bundle.contains("scheme")) c.scheme = c.inputs.scheme(s.config);
    if (bundle.contains("confidence")) {
      auto conf = bundle["confidence"];
      if (!conf.contains("format_version")) conf["format_version"] = bundle.value("format_version", kFormatVersion);
      c.confidence = confidence_from_json(conf);
    }
    c.acquisition = cli::acquisition_from(bundle);
  }
  if (!s.model_path.empty()) c.model = c.inputs.model(s.model_path);
  if (!s.scheme_path.empty()) c.scheme = c.inputs.scheme(s.scheme_path);
  for (const char* role : {"model", "scheme"}) {
    const auto it = c.inputs.documents().find(role);
    if (it == c.inputs.documents().end()) continue;
    const auto extra = cli::acquisition_from(it->second);
    if (!c.acquisition.duration_h) c.acquisition.duration_h = extra.duration_h;
    if (!c.acquisition.duty_cycle) c.acquisition.duty_cycle = extra.duty_cycle;
  }

  if (s.distance_km) c.model.fiber_length_km = *s.distance_km;
  if (s.detector_efficiency) c.model.detector_efficiency = *s.detector_efficiency;
  if (s.intrinsic_error) c.model.intrinsic_error = *s.intrinsic_error;
  if (s.epsilon) c.confidence.epsilon = *s.epsilon;
  if (s.cutoff) c.confidence.photon_cutoff = *s.cutoff;
  if (s.asymptotic) c.confidence.asymptotic = true;
  if (s.duration_h) c.acquisition.duration_h = s.duration_h;
  if (s.duty_cycle) c.acquisition.duty_cycle = s.duty_cycle;

  c.model.validate();
  c.confidence.validate();
  return c;
}

double pulses_for(const Settings& s, const Context& c) {
  if (s.pulses) return *s.pulses;
  const double hours = c.acquisition.duration_h.value_or(kReferenceHours);
  return hours * 3600.0 * c.model.clock_rate_hz * c.acquisition.duty_cycle.value_or(1.0);
}

void emit(const std::string& out, const std::string& text) {
  if (out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

void emit(const std::string& out, const Json& j) { emit(out, j.dump(2) + "\n"); }

Json settings_json(const Context& c, double pulses) {
  Json j;
  j["model"] = to_json(c.model);
  j["scheme"] = to_json(c.scheme);
  j["confidence"] = to_json(c.confidence);
  if (pulses >= 0) j["pulses"] = pulses;
  return j;
}

keyrate::ComposeOptions compose_options(const Settings& s) {
  keyrate::ComposeOptions o;
  o.f_ec = s.f_ec;
  o.f_ds = s.f_ds;
  return o;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string keys_out;
};

int run_simulate(const Settings& s, const SimulateArgs& a) {
  auto c = build_context(s);
  const double want = pulses_for(s, c);
  if (!(want >= 0.0) || want > 1e18) throw std::invalid_argument("pulse count out of range");
  const auto pulses = static_cast<Count>(std::llround(want));

  sim::SimulationOptions opt;
  opt.keep_keys = !a.keys_out.empty();
  const auto session = sim::simulate_session(c.model, c.scheme, pulses, s.seed, opt);

  auto j = to_json(session.tally);
  j["generator"] = {{"seed", s.seed}, {"pulses", pulses}};
  j["settings"] = settings_json(c, static_cast<double>(pulses));
  j["inputs"] = c.inputs.digests();
  emit(s.out, j);

  if (opt.keep_keys) {
    auto k = cli::to_json(cli::RawKeys{session.alice, session.bob});
    k["generator"] = j["generator"];
    k["inputs"] = c.inputs.digests();
    write_json_file(a.keys_out, k);
  }

  const auto& sig = session.tally.levels[c.scheme.signal_index()];
  std::fprintf(stderr, "simulated %llu pulses at %.1f km: signal sifted X %llu / Z %llu, errors X %llu / Z %llu\n",
               static_cast<unsigned long long>(pulses), c.model.fiber_length_km,
               static_cast<unsigned long long>(sig.sifted[0]), static_cast<unsigned long long>(sig.sifted[1]),
               static_cast<unsigned long long>(sig.errors[0]), static_cast<unsigned long long>(sig.errors[1]));
  return kOk;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string tally;
};

void print_key_summary(const keyrate::SessionKey& key) {
  std::fprintf(stderr, "y1 lower %.6g\n", key.bounds.y1.y1_lower);
  for (Basis b : kBases) {
    const auto& sp = key.bounds.single_photon[index(b)];
    std::fprintf(stderr, "errors in %s: b1 upper tight %.6g, worst case %.6g\n", to_string(b), sp.b1_upper_tight,
                 sp.b1_upper_worst);
  }
  for (Basis b : kBases) {
    const auto& t = key.tight[index(b)];
    const auto& w = key.worst[index(b)];
    std::fprintf(stderr, "key from %s: n_sifted %llu, qber %.4f, f_pa %.4f, secret tight %llu, worst case %llu\n",
                 to_string(b), static_cast<unsigned long long>(t.n_sifted), t.qber, t.f_pa,
                 static_cast<unsigned long long>(t.n_secret), static_cast<unsigned long long>(w.n_secret));
  }
  std::fprintf(stderr, "secret bits: tight %llu, worst case %llu\n", static_cast<unsigned long long>(key.total_tight),
               static_cast<unsigned long long>(key.total_worst));
}

int run_analyze(const Settings& s, const AnalyzeArgs& a) {
  auto c = build_context(s);
  const auto tally = c.inputs.tally(a.tally);
  validate_tally(tally, c.scheme);
  const auto key = keyrate::compose_session(tally, c.scheme, c.confidence, compose_options(s));

  auto j = keyrate::to_json(key);
  j["settings"] = settings_json(c, -1);
  j["settings"].erase("model");
  j["settings"]["f_ec"] = s.f_ec;
  j["settings"]["f_ds"] = s.f_ds;
  j["inputs"] = c.inputs.digests();
  emit(s.out, j);
  print_key_summary(key);

  const Count total = s.worst_case ? key.total_worst : key.total_tight;
  return key.bounds.y1.feasible && total > 0 ? kOk : kNoKey;
}

// --- distill ----------------------------------------------------------------

struct DistillArgs {
  std::string tally;
  std::string keys;
  std::string key_out;
  int depth = extract::kDefaultDepth;
};

int run_distill(const Settings& s, const DistillArgs& a) {
  auto c = build_context(s);
  const auto tally = c.inputs.tally(a.tally);
  validate_tally(tally, c.scheme);
  const auto raw = cli::raw_keys_from_json(c.inputs.load("raw_keys", a.keys));
  const auto& sig = tally.levels[c.scheme.signal_index()];
  for (Basis b : kBases) {
    if (raw.alice[index(b)].size() != sig.sifted[index(b)]) {
      throw FormatError("/alice/" + std::string(to_string(b)),
                        "raw key length does not match the signal-level sifted count of the tally");
    }
  }

  const auto bounds = decoy::analyze(tally, c.scheme, c.confidence);
  Json report;
  report["format_version"] = kFormatVersion;
  report["kind"] = "distillation";
  report["bounds"] = decoy::to_json(bounds);

  BitString final_key;
  Count total = 0;
  for (Basis b : kBases) {
    const auto i = index(b);
    const auto& alice = raw.alice[i];
    const auto n = static_cast<Count>(alice.size());
    Json r;
    r["sifted_bits"] = n;
    const std::uint64_t cascade_seed = 2 * s.seed + i;
    const std::uint64_t hash_seed = 2 * s.seed + i + 1'000'003;
    r["cascade_seed"] = cascade_seed;
    r["hash_seed"] = hash_seed;

    const double qber = n > 0 ? std::max<double>(static_cast<double>(sig.errors[i]), 1.0) / static_cast<double>(n) : 0.0;
    r["qber_estimate"] = qber;
    if (n < 64 || qber > 0.25) {
      r["secret_bits"] = 0;
      r["reason"] = n < 64 ? "raw key shorter than 64 bits" : "error rate above what reconciliation can handle";
      report["bases"][to_string(b)] = r;
      continue;
    }

    const auto rec = recon::cascade_reconcile(alice, raw.bob[i], qber, cascade_seed);
    const auto fec = recon::measure_f_ec(rec, n, qber);
    const bool verified = rec.corrected_key == alice;
    r["reconciliation"] = {{"parity_bits_leaked", rec.parity_bits_leaked},
                           {"corrections", rec.corrections},
                           {"first_block_size", rec.first_block_size},
                           {"verified", verified},
                           {"f_ec", fec.f_ec}};

    const auto deskew = extract::peres_extract(rec.corrected_key, a.depth);
    r["deskew"] = {{"depth", deskew.iteration_depth},
                   {"output_bits", deskew.output_bits.size()},
                   {"input_zero_fraction", deskew.input_zero_fraction},
                   {"f_ds", deskew.f_ds_defined ? Json(deskew.f_ds) : Json(nullptr)}};

    keyrate::ComposeOptions opt;
    opt.f_ec = std::max(1.0, fec.f_ec);
    opt.f_ds = deskew.f_ds_defined ? std::max(1.0, deskew.f_ds) : s.f_ds;
    const auto key = keyrate::compose_session(tally, c.scheme, c.confidence, bounds, opt);
    const auto& budget = s.worst_case ? key.worst[i] : key.tight[i];
    r["budget"] = keyrate::to_json(budget);

    Count m = verified ? std::min<Count>(budget.n_secret, deskew.output_bits.size()) : 0;
    const auto hashed = extract::privacy_amplify(deskew.output_bits, static_cast<std::size_t>(m), hash_seed);
    r["secret_bits"] = m;
    r["key_hex"] = extract::to_hex(hashed);
    if (!verified) r["reason"] = "reconciliation left residual errors";
    final_key.insert(final_key.end(), hashed.begin(), hashed.end());
    total += m;
    report["bases"][to_string(b)] = r;
    std::fprintf(stderr, "%s: %llu sifted, leak %llu (f_ec %.3f), deskewed %zu, secret %llu\n", to_string(b),
                 static_cast<unsigned long long>(n), static_cast<unsigned long long>(rec.parity_bits_leaked),
                 fec.f_ec, deskew.output_bits.size(), static_cast<unsigned long long>(m));
  }

  report["secret_bits"] = total;
  report["key_hex"] = extract::to_hex(final_key);
  report["settings"] = settings_json(c, -1);
  report["settings"].erase("model");
  report["settings"]["depth"] = a.depth;
  report["settings"]["seed"] = s.seed;
  report["settings"]["bound"] = s.worst_case ? "worst_case" : "tight";
  report["inputs"] = c.inputs.digests();
  emit(s.out, report);

  if (!a.key_out.empty()) {
    const auto bytes = extract::to_bytes(final_key);
    std::ofstream f(a.key_out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.key_out);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::fprintf(stderr, "final key: %llu bits\n", static_cast<unsigned long long>(total));
  return total > 0 ? kOk : kNoKey;
}

// --- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  std::string trace_csv;
};

opt::OptimizeOptions optimizer_options(const Settings& s, const Context& c) {
  opt::OptimizeOptions o;
  o.evaluate.confidence = c.confidence;
  o.evaluate.compose = compose_options(s);
  o.maximize_worst_case = s.worst_case;
  o.threads = s.threads;
  return o;
}

int run_optimize(const Settings& s, const OptimizeArgs& a) {
  auto c = build_context(s);
  const double pulses = pulses_for(s, c);
  auto o = optimizer_options(s, c);
  o.keep_trace = !a.trace_csv.empty();
  const auto r = opt::optimize_scheme(c.model, pulses, o);

  auto j = opt::to_json(r);
  j["settings"] = settings_json(c, pulses);
  j["settings"].erase("scheme");
  j["inputs"] = c.inputs.digests();
  emit(s.out, j);

  if (!a.trace_csv.empty()) {
    std::ostringstream os;
    os.precision(10);
    os << "stage,mu1,mu2,p0,p1,score,secret\n";
    for (const auto& t : r.trace) {
      os << t.stage << ',' << t.mu1 << ',' << t.mu2 << ',' << t.p0 << ',' << t.p1 << ',' << t.score << ',' << t.secret
         << '\n';
    }
    emit(a.trace_csv, os.str());
  }
  const auto& sch = r.best.scheme;
  std::fprintf(stderr, "best at %.1f km: mu %.4g/%.4g/%.4g, p %.3f/%.3f/%.3f, secret tight %llu, worst case %llu\n",
               c.model.fiber_length_km, sch[0].mu, sch[1].mu, sch[2].mu, sch[0].send_prob, sch[1].send_prob,
               sch[2].send_prob, static_cast<unsigned long long>(r.best.secret_tight),
               static_cast<unsigned long long>(r.best.secret_worst));
  return r.zero_key ? kNoKey : kOk;
}

// --- curve ------------------------------------------------------------------

struct CurveArgs {
  bool optimize = false;
  double from = 0.0, to = 200.0, step = 10.0;
  std::string data;  // "finite" or "infinite"; empty picks by mode
  std::string format = "csv";
  bool refine = true;
  double tolerance = 0.01;
};

const char* kCurveHelp =
    "CSV output: lines starting with '#' carry the input digests and settings, then one row per distance:\n"
    "  distance_km    fiber length\n"
    "  secret_tight   secret bits with the tight single-photon error bound\n"
    "  secret_worst   secret bits with the worst-case single-photon error bound\n"
    "  y1_lower       lower bound on the single-photon transmittance\n"
    "  b1_worst       worst-case single-photon error bound (larger basis)\n"
    "  b1_tight       tight single-photon error bound (larger basis)\n"
    "  mu0,mu1,mu2    mean photon numbers, weakest level first\n"
    "  p0,p1,p2       sending probabilities\n"
    "Unless --no-refine is given, rows at the bisected range endpoints are inserted in distance order.\n"
    "With --optimize every row carries the scheme chosen for that distance and the data volume defaults to\n"
    "'infinite'; a fixed scheme defaults to 'finite' with the pulses of the acquisition (5.6 h by default).";

int run_curve(const Settings& s, const CurveArgs& a) {
  auto c = build_context(s);
  if (!(a.step > 0) || a.to < a.from) throw std::invalid_argument("--from/--to/--step describe no distances");
  const std::string data = a.data.empty() ? (a.optimize ? "infinite" : "finite") : a.data;
  if (data == "infinite") c.confidence.asymptotic = true;
  const double pulses = pulses_for(s, c);

  std::vector<double> d;
  const auto n = static_cast<long>(std::floor((a.to - a.from) / a.step + 1e-9));
  for (long i = 0; i <= n; ++i) d.push_back(a.from + static_cast<double>(i) * a.step);

  opt::CurveOptions o;
  o.optimize = a.optimize;
  o.scheme = c.scheme;
  o.optimizer = optimizer_options(s, c);
  o.optimizer.keep_trace = false;
  o.refine_endpoints = a.refine;
  o.endpoint_tolerance_km = a.tolerance;
  auto curve = opt::range_curve(c.model, pulses, d, o);
  if (a.refine) {
    // Rows at the bisected endpoints, so the last positive row is the range.
    auto single = o;
    single.refine_endpoints = false;
    for (double km : {curve.range_worst_km, curve.range_tight_km}) {
      const bool on_grid = std::any_of(curve.points.begin(), curve.points.end(),
                                       [&](const opt::CurvePoint& p) { return std::abs(p.distance_km - km) < 1e-9; });
      if (km <= a.from || km >= a.to || on_grid) continue;
      const auto extra = opt::range_curve(c.model, pulses, {km}, single);
      const auto at = std::lower_bound(curve.points.begin(), curve.points.end(), km,
                                       [](const opt::CurvePoint& p, double x) { return p.distance_km < x; });
      curve.points.insert(at, extra.points.front());
    }
  }

  auto settings = settings_json(c, pulses);
  settings["optimize"] = a.optimize;
  settings["data"] = data;
  if (a.format == "json") {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "range_curve";
    j["range_tight_km"] = curve.range_tight_km;
    j["range_worst_km"] = curve.range_worst_km;
    j["points"] = Json::array();
    for (const auto& p : curve.points) {
      j["points"].push_back({{"distance_km", p.distance_km},
                             {"secret_tight", p.eval.secret_tight},
                             {"secret_worst", p.eval.secret_worst},
                             {"y1_lower", p.eval.y1_lower},
                             {"b1_worst", p.eval.b1_worst},
                             {"b1_tight", p.eval.b1_tight},
                             {"scheme", to_json(p.eval.scheme)}});
    }
    j["settings"] = settings;
    j["inputs"] = c.inputs.digests();
    emit(s.out, j);
  } else {
    std::ostringstream os;
    os << "# inputs: " << c.inputs.digests().dump() << '\n';
    os << "# settings: " << settings.dump() << '\n';
    os << "# range_tight_km=" << curve.range_tight_km << " range_worst_km=" << curve.range_worst_km << '\n';
    os << opt::to_csv(curve);
    emit(s.out, os.str());
  }
  std::fprintf(stderr, "range: tight %.2f km, worst case %.2f km (%s data)\n", curve.range_tight_km,
               curve.range_worst_km, data.c_str());
  const bool any_key = std::any_of(curve.points.begin(), curve.points.end(), [&](const opt::CurvePoint& p) {
    return (s.worst_case ? p.eval.secret_worst : p.eval.secret_tight) > 0;
  });
  return any_key ? kOk : kNoKey;
}

// --- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::string model_out;
  std::string tally_out;
  std::string config_out;
};

int run_calibrate(const Settings& s, const CalibrateArgs& a) {
  auto c = build_context(s);
  sim::CalibrationTargets targets;
  if (c.acquisition.duration_h) targets.acquisition_hours = *c.acquisition.duration_h;
  const auto r = sim::calibrate_to_paper(c.scheme, c.model, targets, c.confidence, compose_options(s));

  auto j = sim::to_json(r);
  j["inputs"] = c.inputs.digests();
  emit(s.out, j);
  if (!a.model_out.empty()) write_json_file(a.model_out, to_json(r.model));
  if (!a.tally_out.empty()) write_json_file(a.tally_out, to_json(r.tally));
  if (!a.config_out.empty()) {
    Json b;
    b["format_version"] = kFormatVersion;
    b["kind"] = "session_config";
    b["model"] = to_json(r.model);
    b["scheme"] = to_json(c.scheme);
    b["confidence"] = to_json(c.confidence);
    b["acquisition"] = {{"duration_h", targets.acquisition_hours}, {"duty_cycle", r.duty_cycle}};
    write_json_file(a.config_out, b);
  }
  for (const auto& d : r.diagnostics) std::fprintf(stderr, "%s\n", d.c_str());
  std::fprintf(stderr, "calibrated: %.4g pulses (duty cycle %.4f), intrinsic error %.5f, secret tight %llu, worst %llu\n",
               r.pulses, r.duty_cycle, r.model.intrinsic_error, static_cast<unsigned long long>(r.secret_tight),
               static_cast<unsigned long long>(r.secret_worst));
  return r.ok ? kOk : kNoKey;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoy-state BB84 key-rate analysis, simulation and key distillation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "decoyqkd 1.0.0");
  app.footer("Exit status: 0 success, 1 input error, 2 no key or infeasible bounds.\n"
             "Relative config paths are also looked up in $DECOYQKD_CONFIG_DIR.");

  Settings s;

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo acquisition; writes a session tally");
  add_config(simulate, s);
  add_model(simulate, s);
  add_scheme(simulate, s);
  add_volume(simulate, s);
  simulate->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  simulate->add_option("--keys-out", sim_args.keys_out, "Also write the signal-level raw keys here");
  add_output(simulate, s);

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "Single-photon bounds and secret length of a tally");
  analyze->add_option("--tally", an_args.tally, "Session tally JSON")->required();
  add_config(analyze, s);
  add_scheme(analyze, s);
  add_confidence(analyze, s);
  add_factors(analyze, s);
  analyze->add_flag("--worst-case", s.worst_case, "Exit status follows the worst-case key instead of the tight one");
  add_output(analyze, s);

  DistillArgs di_args;
  auto* distill = app.add_subcommand("distill", "Reconcile, deskew and hash raw keys into the final key");
  distill->add_option("--tally", di_args.tally, "Session tally JSON")->required();
  distill->add_option("--keys", di_args.keys, "Raw keys JSON written by simulate --keys-out")->required();
  add_config(distill, s);
  add_scheme(distill, s);
  add_confidence(distill, s);
  distill->add_option("--f-ds", s.f_ds, "Deskewing inefficiency used when the deskewed key is empty")
      ->capture_default_str();
  distill->add_option("--depth", di_args.depth, "Peres iteration depth")->capture_default_str()->check(CLI::Range(1, 40));
  distill->add_option("--seed", s.seed, "Seed for reconciliation shuffles and the hash")->capture_default_str();
  distill->add_option("--key-out", di_args.key_out, "Write the final key bytes here");
  distill->add_flag("--worst-case", s.worst_case, "Size the key with the worst-case error bound");
  add_output(distill, s);

  OptimizeArgs op_args;
  auto* optimize = app.add_subcommand("optimize", "Best intensities and probabilities at one distance");
  add_config(optimize, s);
  add_model(optimize, s);
  add_volume(optimize, s);
  add_confidence(optimize, s);
  add_factors(optimize, s);
  optimize->add_flag("--worst-case", s.worst_case, "Maximize the worst-case key instead of the tight one");
  optimize->add_option("--threads", s.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1, 256));
  optimize->add_option("--trace-csv", op_args.trace_csv, "Write every evaluated candidate here");
  add_output(optimize, s);

  CurveArgs cu_args;
  auto* curve = app.add_subcommand("curve", "Secret key against distance, with range endpoints");
  add_config(curve, s);
  add_model(curve, s);
  add_scheme(curve, s);
  add_volume(curve, s);
  add_confidence(curve, s);
  add_factors(curve, s);
  curve->add_flag("--optimize", cu_args.optimize, "Optimize the scheme at every distance");
  curve->add_option("--from", cu_args.from, "First distance, km")->capture_default_str();
  curve->add_option("--to", cu_args.to, "Last distance, km")->capture_default_str();
  curve->add_option("--step", cu_args.step, "Distance step, km")->capture_default_str();
  curve->add_option("--data", cu_args.data, "Data volume: finite or infinite (default: infinite with --optimize)")
      ->check(CLI::IsMember({"finite", "infinite"}));
  curve->add_option("--format", cu_args.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  curve->add_flag("!--no-refine", cu_args.refine, "Skip bisection of the range endpoints");
  curve->add_option("--tolerance", cu_args.tolerance, "Endpoint tolerance, km")->capture_default_str();
  curve->add_flag("--worst-case", s.worst_case, "Optimize, and set the exit status, by the worst-case key");
  curve->add_option("--threads", s.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1, 256));
  add_output(curve, s);
  curve->footer(kCurveHelp);

  CalibrateArgs ca_args;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the model to the published 135 km aggregates");
  add_config(calibrate, s);
  add_model(calibrate, s);
  add_scheme(calibrate, s);
  add_confidence(calibrate, s);
  add_factors(calibrate, s);
  calibrate->add_option("--duration-h", s.duration_h, "Acquisition time in hours (default 5.6)");
  calibrate->add_option("--model-out", ca_args.model_out, "Write the fitted model here");
  calibrate->add_option("--tally-out", ca_args.tally_out, "Write the reconstructed tally here");
  calibrate->add_option("--config-out", ca_args.config_out, "Write a session bundle (model, scheme, acquisition) here");
  add_output(calibrate, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*simulate) return run_simulate(s, sim_args);
    if (*analyze) return run_analyze(s, an_args);
    if (*distill) return run_distill(s, di_args);
    if (*optimize) return run_optimize(s, op_args);
    if (*curve) return run_curve(s, cu_args);
    if (*calibrate) return run_calibrate(s, ca_args);
  } catch (const InvalidTally& e) {
    std::cerr << "invalid tally: " << e.report().summary() << '\n';
    return kInputError;
  } catch (const FormatError& e) {
    std::cerr << "input error at " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
