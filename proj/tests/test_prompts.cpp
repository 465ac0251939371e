#include "floodlens/prompts.hpp"

#include "floodlens/text_utils.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace floodlens;
using namespace floodlens::analyst;

namespace {

PromptLibrary library() { return PromptLibrary::load(testsup::prompts_dir()); }

EvidenceBundle full_bundle() {
    EvidenceBundle b;
    b.zip = "77067";
    b.window = {*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    b.tweets = {{"903033982874517505", "Flood relief center open on Greens Rd 77067"},
                {"901826476210876417", "Historic flooding across the Houston area"}};
    b.calls_311 = {{"311-551", "Street flooding reported, storm drain backed up"}};
    b.sensor_id = "hcfcd_520";
    b.sensor_rows = {{*parse_iso8601("2017-08-27T13:00:00Z"), 1.2},
                     {*parse_iso8601("2017-08-27T14:00:00Z"), 0.0}};
    b.fema_prior = "Average verified loss $4,210 across 120 claims (2010-2016).";
    b.fema_ref = "fema:77067";
    b.captions = {{"tile_031", "Brown water visible along the waterway near homes"}};
    b.tiles = {"tile_031", "tile_032"};
    return b;
}

} // namespace

TEST_CASE("system prompts are served byte-identical to the shipped files") {
    auto lib = library();
    const std::string mm = read_file((testsup::prompts_dir() / "system_multimodal.txt").string());
    const std::string to = read_file((testsup::prompts_dir() / "system_text_only.txt").string());
    CHECK(lib.system_prompt(PromptMode::multimodal) == mm);
    CHECK(lib.system_prompt(PromptMode::text_only) == to);
    CHECK(lib.checksum(PromptMode::multimodal) == fnv1a64(mm));
    CHECK(lib.checksum(PromptMode::text_only) == fnv1a64(to));
}

TEST_CASE("multimodal system prompt carries the temporal-trust language") {
    auto lib = library();
    const auto& mm = lib.system_prompt(PromptMode::multimodal);
    CHECK(mm.find("TRUST THE TEXT") != std::string::npos);
    CHECK(mm.find("CRITICAL TEMPORAL CONTEXT") != std::string::npos);
    CHECK(mm.find("AVERAGE damage per building") != std::string::npos);
}

TEST_CASE("text-only system prompt forbids imagery talk exactly once") {
    auto lib = library();
    const auto& to = lib.system_prompt(PromptMode::text_only);
    CHECK(count_occurrences(to, "imagery") == 1);
    CHECK(to.find("Do NOT mention imagery or visual evidence") != std::string::npos);
    CHECK(to.find("AVERAGE damage per building") != std::string::npos);
}

TEST_CASE("missing template directory fails loudly") {
    CHECK_THROWS_AS(PromptLibrary::load("/nonexistent/prompt/dir"), std::runtime_error);
}

TEST_CASE("user prompt fills every section") {
    auto lib = library();
    auto bundle = full_bundle();
    const std::string prompt = lib.user_prompt(bundle);

    CHECK(prompt.find("ZIP: 77067") != std::string::npos);
    CHECK(prompt.find("Time window: 2017-08-25 to 2017-09-01") != std::string::npos);
    CHECK(prompt.find("Imagery IDs: tile_031, tile_032") != std::string::npos);
    CHECK(prompt.find("### Sensor Data (Precipitation):") != std::string::npos);
    CHECK(prompt.find("### FEMA Prior Knowledge (Historical Context):") != std::string::npos);
    CHECK(prompt.find("Average verified loss $4,210") != std::string::npos);
    CHECK(prompt.find("### Tweets (Relevant to ZIP 77067) - REAL-TIME REPORTS:") !=
          std::string::npos);
    CHECK(prompt.find("### 311 Calls (Relevant to ZIP 77067) - REAL-TIME REPORTS:") !=
          std::string::npos);
    CHECK(prompt.find("### Image Captions (TEMPORAL WARNING):") != std::string::npos);
    CHECK(prompt.find("Respond with JSON matching schema:") != std::string::npos);
    CHECK(prompt.find("- [903033982874517505] (ZIP 77067) Flood relief center open") !=
          std::string::npos);
    CHECK(prompt.find("- [311-551] (ZIP 77067) Street flooding reported") != std::string::npos);
    CHECK(prompt.find("- [tile_031] Brown water visible") != std::string::npos);
    CHECK(prompt.find("- [hcfcd_520] 2017-08-27T13:00:00Z: 1.2 inches") != std::string::npos);
    // no placeholder survives assembly
    for (const char* placeholder :
         {"{zip_code}", "{start}", "{end}", "{start_date}", "{imagery_tile_ids}", "{sensor_table}",
          "{kb_summary}", "{tweet_id}", "{call_id}", "{caption_list}"})
        CHECK(prompt.find(placeholder) == std::string::npos);
}

TEST_CASE("tweet lines appear once per tweet") {
    auto lib = library();
    auto bundle = full_bundle();
    bundle.tweets = {{"t1", "flood a"}, {"t2", "flood b"}};
    const std::string prompt = lib.user_prompt(bundle);
    CHECK(count_occurrences(prompt, "- [t1] (ZIP 77067)") == 1);
    CHECK(count_occurrences(prompt, "- [t2] (ZIP 77067)") == 1);
    // exactly two tweet bullet lines between the tweets and 311 headers
    const auto tweets_at = prompt.find("### Tweets");
    const auto calls_at = prompt.find("### 311 Calls");
    const std::string section = prompt.substr(tweets_at, calls_at - tweets_at);
    CHECK(count_occurrences(section, "- [") == 2);
}

TEST_CASE("empty 311 section carries the none marker") {
    auto lib = library();
    auto bundle = full_bundle();
    bundle.calls_311.clear();
    const std::string prompt = lib.user_prompt(bundle);
    const auto calls_at = prompt.find("### 311 Calls (Relevant to ZIP 77067)");
    REQUIRE(calls_at != std::string::npos);
    const auto captions_at = prompt.find("### Image Captions");
    const std::string section = prompt.substr(calls_at, captions_at - calls_at);
    CHECK(section.find("None retrieved") != std::string::npos);
}

TEST_CASE("post-peak sensor windows keep the AFTER Aug 28 warning") {
    auto lib = library();
    auto bundle = full_bundle();
    bundle.window = {*parse_iso8601("2017-09-05"), *parse_iso8601("2017-09-10")};
    bundle.sensor_rows = {{*parse_iso8601("2017-09-10T00:00:00Z"), 0.0}};
    const std::string prompt = lib.user_prompt(bundle);
    CHECK(prompt.find("AFTER Aug 28") != std::string::npos);
    CHECK(prompt.find("This sensor data is from 2017-09-05") != std::string::npos);
}

TEST_CASE("prompt assembly is a pure function of the bundle") {
    auto lib = library();
    auto bundle = full_bundle();
    CHECK(lib.user_prompt(bundle) == lib.user_prompt(bundle));
    CHECK(lib.visual_user_prompt(bundle) == lib.visual_user_prompt(bundle));
}

TEST_CASE("visual prompt adds the recession request") {
    auto lib = library();
    auto bundle = full_bundle();
    const std::string base = lib.user_prompt(bundle);
    const std::string visual = lib.visual_user_prompt(bundle);
    CHECK(visual.rfind(base, 0) == 0); // base prompt is a prefix
    CHECK(visual.find("recession_observed") != std::string::npos);
    CHECK(base.find("recession_observed") == std::string::npos);
}

TEST_CASE("query parser prompts") {
    auto lib = library();
    CHECK(lib.query_parser_system().find("query parser") != std::string::npos);
    const std::string user = lib.query_parser_user("How bad was 77096 on Aug 27?");
    CHECK(user.find("User Message: \"How bad was 77096 on Aug 27?\"") != std::string::npos);
    CHECK(user.find("{message}") == std::string::npos);
}

TEST_CASE("bundle id membership") {
    auto bundle = full_bundle();
    CHECK(bundle.has_id("903033982874517505"));
    CHECK(bundle.has_id("311-551"));
    CHECK(bundle.has_id("tile_031"));
    CHECK(bundle.has_id("tile_032"));
    CHECK(bundle.has_id("hcfcd_520"));
    CHECK(bundle.has_id("fema:77067"));
    CHECK_FALSE(bundle.has_id("nonsense"));
    CHECK_FALSE(bundle.empty_evidence());
    CHECK(EvidenceBundle{}.empty_evidence());
}
