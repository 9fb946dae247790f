#pragma once

#include <string>

#include <json.hpp>

#include "decoyqkd/types.hpp"

namespace decoyqkd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "1.0";

/// Thrown for malformed or version-incompatible documents. `where` is a
/// JSON-pointer-like location of the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

Json to_json(const DecoyScheme& scheme);
Json to_json(const SessionTally& tally);
Json to_json(const ChannelModel& model);
Json to_json(const ConfidenceConfig& cfg);

DecoyScheme scheme_from_json(const Json& j);
// Levels may carry per-basis objects {"X": n, "Z": n} or plain totals; totals
// are split evenly between bases and the tally is flagged as reconstructed.
SessionTally tally_from_json(const Json& j);
ChannelModel model_from_json(const Json& j);
ConfidenceConfig confidence_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace decoyqkd
