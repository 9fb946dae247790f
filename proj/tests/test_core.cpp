#include <gtest/gtest.h>

#include "decoyqkd/json_io.hpp"
#include "decoyqkd/types.hpp"

using namespace decoyqkd;

namespace {

DecoyScheme reference_scheme() {
  return DecoyScheme({{0.0025, 0.1}, {0.13, 0.2}, {0.57, 0.7}});
}

// Detections 341 / 5729 / 80776 with sent counts of the calibrated duty cycle.
SessionTally reference_tally() {
  SessionTally t;
  const Count sent[3] = {2383500000ULL, 4767000000ULL, 16684500000ULL};
  const Count det[3] = {341, 5729, 80776};
  for (int j = 0; j < 3; ++j) {
    LevelTally l;
    l.sent = sent[j];
    l.detected = {det[j] / 2, det[j] - det[j] / 2};
    l.sifted = {l.detected[0] / 2, l.detected[1] / 2};
    l.errors = {l.sifted[0] / 25, l.sifted[1] / 25};
    t.levels.push_back(l);
  }
  t.zeros = {t.sifted_in(Basis::X) * 494 / 1000, t.sifted_in(Basis::Z) * 494 / 1000};
  return t;
}

}  // namespace

TEST(DecoyScheme, RejectsMalformedLevels) {
  EXPECT_THROW(DecoyScheme({{0.5, 1.0}}), std::invalid_argument);
  EXPECT_THROW(DecoyScheme({{0.5, 0.5}, {0.1, 0.5}}), std::invalid_argument);
  EXPECT_THROW(DecoyScheme({{0.1, 0.5}, {0.1, 0.5}}), std::invalid_argument);
  EXPECT_THROW(DecoyScheme({{0.1, 0.5}, {0.5, 0.6}}), std::invalid_argument);
  EXPECT_THROW(DecoyScheme({{0.1, 0.0}, {0.5, 1.0}}), std::invalid_argument);
  EXPECT_NO_THROW(reference_scheme());
  EXPECT_DOUBLE_EQ(reference_scheme().signal().mu, 0.57);
}

TEST(ValidateTally, AcceptsReferenceSession) {
  const auto t = reference_tally();
  EXPECT_EQ(&validate_tally(t, reference_scheme()), &t);
}

TEST(ValidateTally, AcceptsAllZeroTally) {
  SessionTally t;
  t.levels.resize(3);
  EXPECT_TRUE(check_tally(t, reference_scheme()).ok());
}

TEST(ValidateTally, NamesLevelAndBasisOfViolation) {
  auto t = reference_tally();
  t.levels[1].errors[index(Basis::Z)] = t.levels[1].sifted[index(Basis::Z)] + 1;
  const auto report = check_tally(t, reference_scheme());
  ASSERT_EQ(report.issues.size(), 1u);
  EXPECT_EQ(report.issues[0].level, 1u);
  ASSERT_TRUE(report.issues[0].basis.has_value());
  EXPECT_EQ(*report.issues[0].basis, Basis::Z);
  EXPECT_EQ(report.issues[0].field, "errors");
  try {
    validate_tally(t, reference_scheme());
    FAIL() << "expected InvalidTally";
  } catch (const InvalidTally& e) {
    EXPECT_NE(std::string(e.what()).find("level 1"), std::string::npos) << e.what();
  }
}

TEST(ValidateTally, LevelCountMismatch) {
  auto t = reference_tally();
  t.levels.pop_back();
  EXPECT_FALSE(check_tally(t, reference_scheme()).ok());
}

// Acceptance iff every chain errors <= sifted <= detected <= sent holds.
TEST(ValidateTally, AcceptsExactlyTheConsistentChains) {
  const auto scheme = DecoyScheme({{0.1, 0.5}, {0.5, 0.5}});
  for (Count sent = 0; sent <= 3; ++sent)
    for (Count det = 0; det <= 3; ++det)
      for (Count sift = 0; sift <= 3; ++sift)
        for (Count err = 0; err <= 3; ++err) {
          SessionTally t;
          t.levels.resize(2);
          t.levels[0].sent = sent;
          t.levels[0].detected = {det, 0};
          t.levels[0].sifted = {sift, 0};
          t.levels[0].errors = {err, 0};
          const bool chain = err <= sift && sift <= det && det <= sent;
          EXPECT_EQ(check_tally(t, scheme).ok(), chain) << sent << det << sift << err;
        }
}

TEST(JsonRoundTrip, Scheme) {
  const auto s = reference_scheme();
  const auto j = to_json(s);
  EXPECT_EQ(j["format_version"], kFormatVersion);
  EXPECT_EQ(scheme_from_json(Json::parse(j.dump())), s);
}

TEST(JsonRoundTrip, Tally) {
  auto t = reference_tally();
  EXPECT_EQ(tally_from_json(Json::parse(to_json(t).dump())), t);
  t.reconstructed = true;
  EXPECT_EQ(tally_from_json(Json::parse(to_json(t).dump())), t);
}

TEST(JsonRoundTrip, ModelAndConfidence) {
  ChannelModel m;
  m.fiber_length_km = 135;
  m.intrinsic_error = 0.0061;
  m.background_rate_hz = 586.9;
  m.zero_fraction = 0.494;
  EXPECT_EQ(model_from_json(Json::parse(to_json(m).dump())), m);
  ConfidenceConfig c{1e-5, 7};
  EXPECT_EQ(confidence_from_json(Json::parse(to_json(c).dump())), c);
}

TEST(JsonInput, PartialTallyIsSplitAndFlagged) {
  const auto j = Json::parse(R"({"format_version":"1.0","levels":[
      {"sent":1000,"detected":341},{"sent":2000,"detected":5729},{"sent":9000,"detected":80776}]})");
  const auto t = tally_from_json(j);
  EXPECT_TRUE(t.reconstructed);
  EXPECT_EQ(t.levels[2].detected_total(), 80776u);
  EXPECT_EQ(t.levels[2].detected[0], 40388u);
  EXPECT_EQ(t.levels[2].sifted[0], 20194u);
  EXPECT_EQ(t.levels[0].errors[0], 0u);
}

TEST(JsonInput, ErrorsCarryLocation) {
  const auto j = Json::parse(R"({"format_version":"1.0","levels":[{"sent":10,"detected":{"X":1}}]})");
  try {
    tally_from_json(j);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("/levels/0/detected/Z"), std::string::npos) << e.what();
  }
  EXPECT_THROW(tally_from_json(Json::parse(R"({"format_version":"2.0","levels":[]})")), FormatError);
  EXPECT_THROW(model_from_json(Json::parse(R"({"format_version":"1.0","detector_efficiency":1.5})")),
               FormatError);
}
