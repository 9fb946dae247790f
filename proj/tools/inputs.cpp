#include "inputs.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace decoyqkd::cli {

namespace fs = std::filesystem;

std::string resolve_path(const std::string& path) {
  if (fs::exists(path)) return path;
  const fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("DECOYQKD_CONFIG_DIR"); dir && *dir) {
      const auto candidate = fs::path(dir) / p;
      if (fs::exists(candidate)) return candidate.string();
    }
  }
  throw FormatError(path, "no such file (also looked in $DECOYQKD_CONFIG_DIR)");
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open file");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 unavailable");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

Json Inputs::load(const std::string& role, const std::string& path) {
  const auto resolved = resolve_path(path);
  auto j = read_json_file(resolved);
  digests_[role] = {{"path", path}, {"sha256", sha256_file(resolved)}};
  documents_[role] = j;
  return j;
}

namespace {

// Unwraps a bundle member, keeping the bundle's version for the header check.
Json member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_object()) return j;
  Json m = j[key];
  if (!m.contains("format_version") && j.contains("format_version")) m["format_version"] = j["format_version"];
  return m;
}

}  // namespace

ChannelModel Inputs::model(const std::string& path) { return model_from_json(member(load("model", path), "model")); }

DecoyScheme Inputs::scheme(const std::string& path) {
  return scheme_from_json(member(load("scheme", path), "scheme"));
}

SessionTally Inputs::tally(const std::string& path) {
  return tally_from_json(member(load("tally", path), "tally"));
}

Acquisition acquisition_from(const Json& bundle) {
  Acquisition a;
  const Json& src = bundle.contains("acquisition") ? bundle["acquisition"] : bundle;
  try {
    if (src.contains("duration_h")) a.duration_h = src["duration_h"].get<double>();
    if (src.contains("duty_cycle")) a.duty_cycle = src["duty_cycle"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("/acquisition", e.what());
  }
  return a;
}

namespace {

std::string encode(const BitString& b) {
  std::string s(b.size(), '0');
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
  return s;
}

BitString decode(const Json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError(where, "expected a string of '0' and '1'");
  const auto& s = j.get_ref<const std::string&>();
  BitString b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw FormatError(where, "bad character at offset " + std::to_string(i));
    b[i] = s[i] == '1';
  }
  return b;
}

}  // namespace

Json to_json(const RawKeys& keys) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "raw_keys";
  for (Basis b : kBases) {
    j["alice"][to_string(b)] = encode(keys.alice[index(b)]);
    j["bob"][to_string(b)] = encode(keys.bob[index(b)]);
  }
  return j;
}

RawKeys raw_keys_from_json(const Json& j) {
  if (!j.is_object() || j.value("kind", "") != "raw_keys") throw FormatError("/kind", "expected 'raw_keys'");
  RawKeys k;
  for (const char* party : {"alice", "bob"}) {
    if (!j.contains(party)) throw FormatError(std::string("/") + party, "missing");
    for (Basis b : kBases) {
      const auto where = std::string("/") + party + "/" + to_string(b);
      if (!j[party].contains(to_string(b))) throw FormatError(where, "missing");
      (std::string(party) == "alice" ? k.alice : k.bob)[index(b)] = decode(j[party][to_string(b)], where);
    }
  }
  for (Basis b : kBases) {
    if (k.alice[index(b)].size() != k.bob[index(b)].size()) {
      throw FormatError(std::string("/bob/") + to_string(b), "length differs from alice's key");
    }
  }
  return k;
}

}  // namespace decoyqkd::cli
