#pragma once

#include <map>
#include <optional>
#include <string>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/types.hpp"

namespace decoyqkd::cli {

/// Resolves `path` against the working directory first, then against the
/// directory named by DECOYQKD_CONFIG_DIR.
std::string resolve_path(const std::string& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Loaded input documents plus the digest of every file read.
class Inputs {
 public:
  // Reads a document and records its digest under `role`.
  Json load(const std::string& role, const std::string& path);

  // A model or scheme may live in its own document or inside a bundle
  // ("session_config", "calibration") under the "model" / "scheme" key.
  ChannelModel model(const std::string& path);
  DecoyScheme scheme(const std::string& path);
  SessionTally tally(const std::string& path);

  const Json& digests() const { return digests_; }
  // Every document read so far, by role.
  const std::map<std::string, Json>& documents() const { return documents_; }

 private:
  Json digests_ = Json::object();
  std::map<std::string, Json> documents_;
};

/// Acquisition block of a bundle: {"duration_h": h, "duty_cycle": d}.
struct Acquisition {
  std::optional<double> duration_h;
  std::optional<double> duty_cycle;
};
Acquisition acquisition_from(const Json& bundle);

struct RawKeys {
  PerBasis<BitString> alice;
  PerBasis<BitString> bob;
};

Json to_json(const RawKeys& keys);
RawKeys raw_keys_from_json(const Json& j);

}  // namespace decoyqkd::cli
