#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "decoyqkd/calibrate.hpp"
#include "decoyqkd/decoy.hpp"
#include "decoyqkd/extract.hpp"
#include "decoyqkd/json_io.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/opt.hpp"
#include "decoyqkd/recon.hpp"
#include "decoyqkd/sim.hpp"
#include "decoyqkd/stats.hpp"

namespace py = pybind11;
using namespace decoyqkd;

namespace {

// Documents cross the boundary as Python dicts, through the json module.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

BitString bits_from(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  BitString b(static_cast<std::size_t>(a.size()));
  const auto* p = a.data();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (p[i] > 1) throw std::invalid_argument("bit arrays may only hold 0 and 1");
    b[i] = p[i];
  }
  return b;
}

py::array_t<std::uint8_t> bits_to(const BitString& b) {
  py::array_t<std::uint8_t> a(static_cast<py::ssize_t>(b.size()));
  std::copy(b.begin(), b.end(), a.mutable_data());
  return a;
}

ConfidenceConfig confidence(double epsilon, int cutoff, bool asymptotic) {
  ConfidenceConfig c;
  c.epsilon = epsilon;
  c.photon_cutoff = cutoff;
  c.asymptotic = asymptotic;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decoy-state BB84 analysis: bounds, key length, simulation and distillation";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<InvalidTally>(m, "InvalidTally", PyExc_ValueError);

  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init<>())
      .def_readwrite("fiber_length_km", &ChannelModel::fiber_length_km)
      .def_readwrite("attenuation_db_per_km", &ChannelModel::attenuation_db_per_km)
      .def_readwrite("detector_efficiency", &ChannelModel::detector_efficiency)
      .def_readwrite("dark_rate_hz", &ChannelModel::dark_rate_hz)
      .def_readwrite("timing_window_s", &ChannelModel::timing_window_s)
      .def_readwrite("clock_rate_hz", &ChannelModel::clock_rate_hz)
      .def_readwrite("intrinsic_error", &ChannelModel::intrinsic_error)
      .def_readwrite("background_rate_hz", &ChannelModel::background_rate_hz)
      .def_readwrite("zero_fraction", &ChannelModel::zero_fraction)
      .def("validate", &ChannelModel::validate)
      .def("to_dict", [](const ChannelModel& c) { return to_py(to_json(c)); })
      .def_static("from_dict", [](const py::dict& d) { return model_from_json(from_py(d)); })
      .def("__eq__", [](const ChannelModel& a, const ChannelModel& b) { return a == b; })
      .def("__repr__", [](const ChannelModel& c) {
        return "ChannelModel(fiber_length_km=" + std::to_string(c.fiber_length_km) + ")";
      });

  py::class_<DecoyScheme>(m, "DecoyScheme")
      .def(py::init([](const std::vector<std::pair<double, double>>& levels) {
             std::vector<IntensityLevel> l;
             for (const auto& [mu, p] : levels) l.push_back({mu, p});
             return DecoyScheme(std::move(l));
           }),
           py::arg("levels"), "Levels as (mu, send_prob) pairs, weakest first.")
      .def_property_readonly("levels",
                             [](const DecoyScheme& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& l : s.levels()) out.emplace_back(l.mu, l.send_prob);
                               return out;
                             })
      .def("__len__", &DecoyScheme::size)
      .def("to_dict", [](const DecoyScheme& s) { return to_py(to_json(s)); })
      .def_static("from_dict", [](const py::dict& d) { return scheme_from_json(from_py(d)); })
      .def("__eq__", [](const DecoyScheme& a, const DecoyScheme& b) { return a == b; });

  m.def("reference_model", &sim::reference_model);
  m.def("reference_scheme", &sim::reference_scheme);

  m.def("binary_entropy", &stats::binary_entropy, py::arg("p"));
  m.def(
      "binomial_interval",
      [](Count k, Count n, double epsilon) {
        const auto b = stats::binomial_interval(k, n, epsilon);
        return std::make_pair(b.lower, b.upper);
      },
      py::arg("k"), py::arg("n"), py::arg("epsilon") = 1e-7,
      "Clopper-Pearson (lower, upper), each side failing with probability epsilon.");
  m.def("privacy_amplification_factor", &keyrate::privacy_amplification_factor, py::arg("n1"), py::arg("b1"),
        py::arg("epsilon") = 1e-7);

  m.def(
      "simulate",
      [](const ChannelModel& model, const DecoyScheme& scheme, Count pulses, std::uint64_t seed, bool keep_keys) {
        sim::SimulationOptions o;
        o.keep_keys = keep_keys;
        sim::SimulatedSession s;
        {
          py::gil_scoped_release release;
          s = sim::simulate_session(model, scheme, pulses, seed, o);
        }
        py::dict out;
        out["tally"] = to_py(to_json(s.tally));
        if (keep_keys) {
          for (Basis b : kBases) {
            out[py::str(std::string("alice_") + to_string(b))] = bits_to(s.alice[index(b)]);
            out[py::str(std::string("bob_") + to_string(b))] = bits_to(s.bob[index(b)]);
          }
        }
        return out;
      },
      py::arg("model"), py::arg("scheme"), py::arg("pulses"), py::arg("seed") = 1, py::arg("keep_keys") = false);

  m.def(
      "expected_tally",
      [](const ChannelModel& model, const DecoyScheme& scheme, double pulses) {
        return to_py(to_json(sim::expected_tally(model, scheme, pulses)));
      },
      py::arg("model"), py::arg("scheme"), py::arg("pulses"));

  m.def(
      "analyze",
      [](const py::dict& tally, const DecoyScheme& scheme, double epsilon, int cutoff, bool asymptotic, double f_ec,
         double f_ds) {
        const auto t = tally_from_json(from_py(tally));
        validate_tally(t, scheme);
        keyrate::ComposeOptions o;
        o.f_ec = f_ec;
        o.f_ds = f_ds;
        return to_py(keyrate::to_json(keyrate::compose_session(t, scheme, confidence(epsilon, cutoff, asymptotic), o)));
      },
      py::arg("tally"), py::arg("scheme"), py::arg("epsilon") = 1e-7, py::arg("cutoff") = 10,
      py::arg("asymptotic") = false, py::arg("f_ec") = 1.07, py::arg("f_ds") = 1.05,
      "Bound set and secret length of a tally dict; returns the key report.");

  m.def(
      "calibrate",
      [](const DecoyScheme& scheme, const ChannelModel& model) {
        return to_py(sim::to_json(sim::calibrate_to_paper(scheme, model)));
      },
      py::arg("scheme") = sim::reference_scheme(), py::arg("model") = sim::reference_model());

  m.def(
      "optimize",
      [](const ChannelModel& model, double pulses, bool worst_case, bool asymptotic, int threads) {
        opt::OptimizeOptions o;
        o.maximize_worst_case = worst_case;
        o.evaluate.confidence.asymptotic = asymptotic;
        o.threads = threads;
        o.keep_trace = false;
        opt::OptimizationResult r;
        {
          py::gil_scoped_release release;
          r = opt::optimize_scheme(model, pulses, o);
        }
        return to_py(opt::to_json(r));
      },
      py::arg("model"), py::arg("pulses"), py::arg("worst_case") = false, py::arg("asymptotic") = false,
      py::arg("threads") = 1);

  m.def(
      "range_curve",
      [](const ChannelModel& model, double pulses, const std::vector<double>& distances,
         std::optional<DecoyScheme> scheme, bool asymptotic) {
        opt::CurveOptions o;
        o.optimize = !scheme.has_value();
        o.scheme = scheme.value_or(DecoyScheme{});
        o.optimizer.keep_trace = false;
        o.optimizer.evaluate.confidence.asymptotic = asymptotic;
        opt::RangeCurve c;
        {
          py::gil_scoped_release release;
          c = opt::range_curve(model, pulses, distances, o);
        }
        py::dict out;
        out["range_tight_km"] = c.range_tight_km;
        out["range_worst_km"] = c.range_worst_km;
        py::list rows;
        for (const auto& p : c.points) {
          py::dict r;
          r["distance_km"] = p.distance_km;
          r["secret_tight"] = p.eval.secret_tight;
          r["secret_worst"] = p.eval.secret_worst;
          r["y1_lower"] = p.eval.y1_lower;
          r["b1_tight"] = p.eval.b1_tight;
          r["b1_worst"] = p.eval.b1_worst;
          rows.append(r);
        }
        out["points"] = rows;
        return out;
      },
      py::arg("model"), py::arg("pulses"), py::arg("distances"), py::arg("scheme") = py::none(),
      py::arg("asymptotic") = false, "Fixed-scheme curve when `scheme` is given, per-distance optimum otherwise.");

  m.def(
      "cascade",
      [](const py::array_t<std::uint8_t>& alice, const py::array_t<std::uint8_t>& bob, double qber,
         std::uint64_t seed) {
        const auto a = bits_from(alice);
        const auto r = recon::cascade_reconcile(a, bits_from(bob), qber, seed);
        py::dict out;
        out["corrected"] = bits_to(r.corrected_key);
        out["parity_bits_leaked"] = r.parity_bits_leaked;
        out["corrections"] = r.corrections;
        out["f_ec"] = recon::measure_f_ec(r, static_cast<Count>(a.size()), qber).f_ec;
        return out;
      },
      py::arg("alice"), py::arg("bob"), py::arg("qber"), py::arg("seed") = 1);

  m.def(
      "peres",
      [](const py::array_t<std::uint8_t>& bits, int depth) {
        return bits_to(extract::peres_extract(bits_from(bits), depth).output_bits);
      },
      py::arg("bits"), py::arg("depth") = extract::kDefaultDepth);
  m.def("peres_rate", &extract::peres_rate, py::arg("zero_fraction"), py::arg("depth"));

  m.def(
      "toeplitz_hash",
      [](const py::array_t<std::uint8_t>& key, std::size_t length, std::uint64_t seed) {
        return bits_to(extract::privacy_amplify(bits_from(key), length, seed));
      },
      py::arg("key"), py::arg("length"), py::arg("seed"));
}
