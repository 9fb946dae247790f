#include "decoyqkd/json_io.hpp"

#include <fstream>

namespace decoyqkd {

namespace {

Json header(const char* kind) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind;
  return j;
}

void check_header(const Json& j, const char* kind) {
  if (!j.is_object()) throw FormatError("/", "expected a JSON object");
  if (!j.contains("format_version")) throw FormatError("/format_version", "missing");
  const auto& v = j["format_version"];
  if (!v.is_string()) throw FormatError("/format_version", "must be a string");
  const auto version = v.get<std::string>();
  if (version.rfind("1.", 0) != 0) {
    throw FormatError("/format_version", "unsupported version '" + version + "'");
  }
  if (j.contains("kind") && j["kind"] != kind) {
    throw FormatError("/kind", "expected '" + std::string(kind) + "'");
  }
}

template <typename T>
T get_field(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw FormatError(path + "/" + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + "/" + key, e.what());
  }
}

template <typename T>
T get_or(const Json& j, const std::string& path, const char* key, T fallback) {
  return j.contains(key) ? get_field<T>(j, path, key) : fallback;
}

Json per_basis(const PerBasis<Count>& v) { return Json{{"X", v[0]}, {"Z", v[1]}}; }

// Returns true when the value had to be split from a plain total.
bool read_per_basis(const Json& j, const std::string& path, PerBasis<Count>& out) {
  if (j.is_object()) {
    out[0] = get_field<Count>(j, path, "X");
    out[1] = get_field<Count>(j, path, "Z");
    return false;
  }
  if (j.is_number_unsigned() || j.is_number_integer()) {
    if (j.is_number_integer() && j.get<std::int64_t>() < 0) {
      throw FormatError(path, "counts must be non-negative");
    }
    const auto total = j.get<Count>();
    out[0] = total / 2;
    out[1] = total - out[0];
    return true;
  }
  throw FormatError(path, "expected {\"X\": n, \"Z\": n} or a non-negative integer");
}

}  // namespace

Json to_json(const DecoyScheme& scheme) {
  Json j = header("decoy_scheme");
  j["levels"] = Json::array();
  for (const auto& l : scheme.levels()) {
    j["levels"].push_back(Json{{"mu", l.mu}, {"send_prob", l.send_prob}});
  }
  return j;
}

Json to_json(const SessionTally& tally) {
  Json j = header("session_tally");
  j["reconstructed"] = tally.reconstructed;
  j["levels"] = Json::array();
  for (const auto& l : tally.levels) {
    j["levels"].push_back(Json{{"sent", l.sent},
                               {"detected", per_basis(l.detected)},
                               {"sifted", per_basis(l.sifted)},
                               {"errors", per_basis(l.errors)}});
  }
  j["zeros"] = per_basis(tally.zeros);
  return j;
}

Json to_json(const ChannelModel& m) {
  Json j = header("channel_model");
  j["fiber_length_km"] = m.fiber_length_km;
  j["attenuation_db_per_km"] = m.attenuation_db_per_km;
  j["detector_efficiency"] = m.detector_efficiency;
  j["dark_rate_hz"] = m.dark_rate_hz;
  j["timing_window_s"] = m.timing_window_s;
  j["clock_rate_hz"] = m.clock_rate_hz;
  j["intrinsic_error"] = m.intrinsic_error;
  j["background_rate_hz"] = m.background_rate_hz;
  j["zero_fraction"] = m.zero_fraction;
  return j;
}

Json to_json(const ConfidenceConfig& cfg) {
  Json j = header("confidence_config");
  j["epsilon"] = cfg.epsilon;
  j["photon_cutoff"] = cfg.photon_cutoff;
  if (cfg.asymptotic) j["asymptotic"] = true;
  return j;
}

DecoyScheme scheme_from_json(const Json& j) {
  check_header(j, "decoy_scheme");
  if (!j.contains("levels") || !j["levels"].is_array()) {
    throw FormatError("/levels", "expected an array");
  }
  std::vector<IntensityLevel> levels;
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    const auto path = "/levels/" + std::to_string(i);
    const auto& l = j["levels"][i];
    levels.push_back({get_field<double>(l, path, "mu"), get_field<double>(l, path, "send_prob")});
  }
  try {
    return DecoyScheme(std::move(levels));
  } catch (const std::invalid_argument& e) {
    throw FormatError("/levels", e.what());
  }
}

SessionTally tally_from_json(const Json& j) {
  check_header(j, "session_tally");
  if (!j.contains("levels") || !j["levels"].is_array()) {
    throw FormatError("/levels", "expected an array");
  }
  SessionTally t;
  t.reconstructed = get_or<bool>(j, "", "reconstructed", false);
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    const auto path = "/levels/" + std::to_string(i);
    const auto& l = j["levels"][i];
    LevelTally lt;
    lt.sent = get_field<Count>(l, path, "sent");
    if (!l.contains("detected")) throw FormatError(path + "/detected", "missing");
    t.reconstructed |= read_per_basis(l["detected"], path + "/detected", lt.detected);
    if (l.contains("sifted")) {
      t.reconstructed |= read_per_basis(l["sifted"], path + "/sifted", lt.sifted);
    } else {
      // Unbiased basis choice at both ends: half of the detections sift.
      for (std::size_t b = 0; b < 2; ++b) lt.sifted[b] = lt.detected[b] / 2;
      t.reconstructed = true;
    }
    if (l.contains("errors")) {
      t.reconstructed |= read_per_basis(l["errors"], path + "/errors", lt.errors);
    } else {
      t.reconstructed = true;
    }
    t.levels.push_back(lt);
  }
  if (j.contains("zeros")) {
    t.reconstructed |= read_per_basis(j["zeros"], "/zeros", t.zeros);
  } else {
    for (Basis b : kBases) t.zeros[index(b)] = t.sifted_in(b) / 2;
    t.reconstructed = true;
  }
  return t;
}

ChannelModel model_from_json(const Json& j) {
  check_header(j, "channel_model");
  ChannelModel m;
  m.fiber_length_km = get_or(j, "", "fiber_length_km", m.fiber_length_km);
  m.attenuation_db_per_km = get_or(j, "", "attenuation_db_per_km", m.attenuation_db_per_km);
  m.detector_efficiency = get_or(j, "", "detector_efficiency", m.detector_efficiency);
  m.dark_rate_hz = get_or(j, "", "dark_rate_hz", m.dark_rate_hz);
  m.timing_window_s = get_or(j, "", "timing_window_s", m.timing_window_s);
  m.clock_rate_hz = get_or(j, "", "clock_rate_hz", m.clock_rate_hz);
  m.intrinsic_error = get_or(j, "", "intrinsic_error", m.intrinsic_error);
  m.background_rate_hz = get_or(j, "", "background_rate_hz", m.background_rate_hz);
  m.zero_fraction = get_or(j, "", "zero_fraction", m.zero_fraction);
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("/", e.what());
  }
  return m;
}

ConfidenceConfig confidence_from_json(const Json& j) {
  check_header(j, "confidence_config");
  ConfidenceConfig c;
  c.epsilon = get_or(j, "", "epsilon", c.epsilon);
  c.photon_cutoff = get_or(j, "", "photon_cutoff", c.photon_cutoff);
  c.asymptotic = get_or(j, "", "asymptotic", c.asymptotic);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("/", e.what());
  }
  return c;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path, e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace decoyqkd
