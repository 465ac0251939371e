#include "floodlens/report.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace floodlens;
using namespace floodlens::analyst;

namespace {

const char* kWellFormed = R"({
  "reasoning": "Tweets report street-level inundation.",
  "zip": "77067",
  "time_window": {"start": "2017-08-25", "end": "2017-09-01"},
  "estimates": {
    "flood_extent_pct": 60.0,
    "damage_severity_pct": 30.0,
    "roads_impacted": ["Greens Rd"],
    "confidence": 0.85
  },
  "evidence_refs": {
    "imagery_tile_ids": ["tile_031"],
    "tweet_ids": ["903033982874517505"],
    "call_311_ids": [],
    "sensor_ids": ["hcfcd_520"],
    "kb_refs": []
  },
  "natural_language_summary": "Significant flooding reported."
})";

} // namespace

TEST_CASE("well-formed report parses field for field") {
    auto r = parse_report(kWellFormed);
    CHECK(r.flood_extent_pct == doctest::Approx(60.0));
    CHECK(r.damage_severity_pct == doctest::Approx(30.0));
    CHECK(r.confidence == doctest::Approx(0.85));
    REQUIRE(r.roads_impacted.size() == 1);
    CHECK(r.roads_impacted[0] == "Greens Rd");
    CHECK(r.reasoning == "Tweets report street-level inundation.");
    CHECK(r.evidence_refs.tweet_ids == std::vector<std::string>{"903033982874517505"});
    CHECK(r.evidence_refs.sensor_ids == std::vector<std::string>{"hcfcd_520"});
    CHECK(r.parse_flags == std::vector<std::string>{"recession_inferred"});
    CHECK_FALSE(r.recession_observed);
}

TEST_CASE("out-of-range numerics clamp with flags") {
    auto r = parse_report(R"({"estimates":{"flood_extent_pct":150,"damage_severity_pct":-3,
        "confidence":1.4}})");
    CHECK(r.flood_extent_pct == doctest::Approx(100.0));
    CHECK(r.damage_severity_pct == doctest::Approx(0.0));
    CHECK(r.confidence == doctest::Approx(1.0));
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "clamped_flood_extent") == 1);
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "clamped_damage_severity") == 1);
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "clamped_confidence") == 1);
}

TEST_CASE("fenced JSON parses identically to bare JSON") {
    const std::string bare = kWellFormed;
    const std::string fenced = "Here is the analysis:\n```json\n" + bare + "\n```\nDone.";
    auto a = parse_report(bare);
    auto b = parse_report(fenced);
    CHECK(a.flood_extent_pct == b.flood_extent_pct);
    CHECK(a.damage_severity_pct == b.damage_severity_pct);
    CHECK(a.confidence == b.confidence);
    CHECK(a.reasoning == b.reasoning);
    CHECK(a.evidence_refs.tweet_ids == b.evidence_refs.tweet_ids);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_report("no json here at all"), ReportParseError);
    CHECK_THROWS_AS(parse_report(R"({"estimates":{"flood_extent_pct":10}})"), ReportParseError);
    CHECK_THROWS_AS(parse_report(R"({"flood":"yes"})"), ReportParseError);
}

TEST_CASE("missing confidence defaults with a flag") {
    auto r = parse_report(R"({"estimates":{"flood_extent_pct":10,"damage_severity_pct":5}})");
    CHECK(r.confidence == doctest::Approx(0.5));
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "confidence_missing") == 1);
}

TEST_CASE("missing recession flag is inferred from extent and timing") {
    const char* low = R"({"estimates":{"flood_extent_pct":2,"damage_severity_pct":5,
        "confidence":0.5}})";
    CHECK(parse_report(low, /*after_peak_hint=*/true).recession_observed);
    CHECK_FALSE(parse_report(low, /*after_peak_hint=*/false).recession_observed);
    const char* high = R"({"estimates":{"flood_extent_pct":40,"damage_severity_pct":5,
        "confidence":0.5}})";
    CHECK_FALSE(parse_report(high, true).recession_observed);

    // explicit flag wins over inference
    const char* explicit_true = R"({"estimates":{"flood_extent_pct":40,"damage_severity_pct":5,
        "confidence":0.5,"recession_observed":true}})";
    auto r = parse_report(explicit_true, false);
    CHECK(r.recession_observed);
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "recession_inferred") == 0);
}

TEST_CASE("numeric ids in evidence refs coerce to strings") {
    auto r = parse_report(R"({"estimates":{"flood_extent_pct":10,"damage_severity_pct":5,
        "confidence":0.5},"evidence_refs":{"tweet_ids":[903033982874517505,"abc"]}})");
    REQUIRE(r.evidence_refs.tweet_ids.size() == 2);
    CHECK(r.evidence_refs.tweet_ids[0] == "903033982874517505");
    CHECK(r.evidence_refs.tweet_ids[1] == "abc");
}

TEST_CASE("render then parse round-trips a valid report") {
    AnalystReport r;
    r.flood_extent_pct = 42.5;
    r.damage_severity_pct = 17.25;
    r.recession_observed = true;
    r.confidence = 0.75;
    r.roads_impacted = {"I-45", "Greens Rd"};
    r.reasoning = "Multiple convergent reports.";
    r.natural_language_summary = "Roughly two fifths of the area flooded.";
    r.evidence_refs.tweet_ids = {"t1", "t2"};
    r.evidence_refs.imagery_tile_ids = {"tile_1"};
    r.evidence_refs.sensor_ids = {"s1"};

    auto parsed = parse_report(render_report(r));
    CHECK(parsed.flood_extent_pct == r.flood_extent_pct);
    CHECK(parsed.damage_severity_pct == r.damage_severity_pct);
    CHECK(parsed.recession_observed == r.recession_observed);
    CHECK(parsed.confidence == r.confidence);
    CHECK(parsed.roads_impacted == r.roads_impacted);
    CHECK(parsed.reasoning == r.reasoning);
    CHECK(parsed.natural_language_summary == r.natural_language_summary);
    CHECK(parsed.evidence_refs.tweet_ids == r.evidence_refs.tweet_ids);
    CHECK(parsed.evidence_refs.imagery_tile_ids == r.evidence_refs.imagery_tile_ids);
    CHECK(parsed.evidence_refs.sensor_ids == r.evidence_refs.sensor_ids);
    CHECK(parsed.parse_flags.empty());
}

TEST_CASE("sanitize strips ids absent from the bundle") {
    EvidenceBundle bundle;
    bundle.zip = "77067";
    bundle.tweets = {{"t1", "a"}, {"t2", "b"}};
    bundle.tiles = {"tile_1"};
    bundle.sensor_id = "s1";

    AnalystReport r;
    r.evidence_refs.tweet_ids = {"t1", "made_up", "t2"};
    r.evidence_refs.imagery_tile_ids = {"tile_1", "tile_99"};
    r.evidence_refs.sensor_ids = {"s1", "s9"};
    r.evidence_refs.kb_refs = {"phantom"};

    const auto removed = sanitize_evidence_refs(r, bundle);
    CHECK(removed == 4);
    CHECK(r.evidence_refs.tweet_ids == std::vector<std::string>{"t1", "t2"});
    CHECK(r.evidence_refs.imagery_tile_ids == std::vector<std::string>{"tile_1"});
    CHECK(r.evidence_refs.sensor_ids == std::vector<std::string>{"s1"});
    CHECK(r.evidence_refs.kb_refs.empty());
    CHECK(std::count(r.parse_flags.begin(), r.parse_flags.end(), "stripped_refs:4") == 1);
}

TEST_CASE("parse_user_query happy path and rules") {
    auto prompts = PromptLibrary::load(testsup::prompts_dir());

    MockChatClient mock;
    mock.set_default_response(R"({"zip":"77096","start":"2017-08-27","end":"2017-08-28"})");
    auto q = parse_user_query("how flooded was 77096", mock, prompts);
    CHECK_FALSE(q.parse_failed);
    CHECK(q.zip == "77096");
    CHECK(format_date(*q.start) == "2017-08-27");
    CHECK(format_date(*q.end) == "2017-08-28");

    MockChatClient one_date;
    one_date.set_default_response(R"({"zip":"77096","start":"2017-08-27","end":null})");
    auto q2 = parse_user_query("单 date", one_date, prompts);
    CHECK(format_date(*q2.start) == "2017-08-27");
    CHECK(format_date(*q2.end) == "2017-08-27"); // single date fills both ends

    MockChatClient swapped;
    swapped.set_default_response(R"({"zip":"77096","start":"2017-09-02","end":"2017-08-27"})");
    auto q3 = parse_user_query("swapped", swapped, prompts);
    CHECK(*q3.start <= *q3.end);

    MockChatClient garbage;
    garbage.set_default_response("I cannot help with that.");
    auto q4 = parse_user_query("???", garbage, prompts);
    CHECK(q4.parse_failed);
    CHECK_FALSE(q4.zip.has_value());
    CHECK_FALSE(q4.start.has_value());

    MockChatClient nulls;
    nulls.set_default_response(R"({"zip":null,"start":null,"end":null})");
    auto q5 = parse_user_query("no info", nulls, prompts);
    CHECK_FALSE(q5.parse_failed);
    CHECK_FALSE(q5.zip.has_value());
}
