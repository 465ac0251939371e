#include "floodlens/corpus.hpp"
#include "floodlens/text_utils.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <regex>

using namespace floodlens;
using namespace floodlens::corpus;

namespace {

// Independent stage-by-stage re-scan used as the filtering oracle.
struct NaiveVerdict {
    enum Stage { retweet, blocked, no_allow, spam, kept } stage;
};

NaiveVerdict naive_classify(const std::string& text, const FilterConfig& cfg) {
    size_t i = 0;
    while (i < text.size() && isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (ascii_lower(text.substr(i, 4)) == "rt @") return {NaiveVerdict::retweet};

    auto toks = tokenize(text);
    auto any_in = [&](const std::unordered_set<std::string>& set) {
        return std::any_of(toks.begin(), toks.end(),
                           [&](const std::string& t) { return set.count(t) != 0; });
    };
    if (any_in(cfg.block_keywords)) return {NaiveVerdict::blocked};
    if (!any_in(cfg.allow_keywords)) return {NaiveVerdict::no_allow};

    int hashtags = 0, urls = 0;
    for (char c : text)
        if (c == '#') ++hashtags;
    for (size_t p = 0; (p = text.find("http://", p)) != std::string::npos; p += 7) ++urls;
    for (size_t p = 0; (p = text.find("https://", p)) != std::string::npos; p += 8) ++urls;
    if (hashtags > cfg.max_hashtags || urls > cfg.max_urls) return {NaiveVerdict::spam};
    return {NaiveVerdict::kept};
}

} // namespace

TEST_CASE("is_retweet marker detection") {
    CHECK(is_retweet("RT @user: water rising"));
    CHECK_FALSE(is_retweet("water rising on my street"));
    // case-insensitive after leading-whitespace trim; cross-checked with the
    // naive prefix oracle
    CHECK(is_retweet("  rt @x flood"));
    CHECK(naive_classify("  rt @x flood", FilterConfig::harvey_default()).stage ==
          NaiveVerdict::retweet);
    CHECK_FALSE(is_retweet("RT@nospace"));
    CHECK_FALSE(is_retweet(""));
    CHECK_FALSE(is_retweet("   "));
}

TEST_CASE("keyword_match is whole-word and case-insensitive") {
    auto cfg = FilterConfig::harvey_default();
    CHECK(keyword_match("Massive FLOOD downtown", cfg.allow_keywords));
    CHECK(keyword_match("new spotify playlist", cfg.block_keywords));

    // whole-word rule, checked against a regex word-boundary oracle
    std::unordered_set<std::string> just_flood{"flood"};
    const std::string text = "floodlight sale ended";
    CHECK_FALSE(keyword_match(text, just_flood));
    std::regex word(R"(\bflood\b)", std::regex::icase);
    CHECK_FALSE(std::regex_search(text, word));
    CHECK(keyword_match("flood-light", just_flood)); // hyphen splits tokens
    CHECK(keyword_match("Call 911 now", {"911"}));
}

TEST_CASE("is_spam thresholds") {
    FilterConfig cfg = FilterConfig::harvey_default();
    cfg.max_hashtags = 5;
    cfg.max_urls = 3;
    CHECK(is_spam("#a#b#c#d#e#f flood", cfg));
    CHECK_FALSE(is_spam("plain flood report", cfg));
    // counting oracle over the fixture text: exactly four URL markers
    const std::string four_urls = "flood http://a.com https://b.com http://c.com https://d.com";
    CHECK(count_occurrences(four_urls, "http://") + count_occurrences(four_urls, "https://") == 4);
    CHECK(is_spam(four_urls, cfg));
    cfg.max_urls = 4;
    CHECK_FALSE(is_spam(four_urls, cfg));
}

TEST_CASE("filter_pipeline stage order and stats") {
    auto cfg = FilterConfig::harvey_default();
    std::vector<Document> raw = {
        testsup::make_doc("1", "RT @a flood"),
        testsup::make_doc("2", "flood help"),
        testsup::make_doc("3", "spotify flood mix"),
        testsup::make_doc("4", "#a#b#c#d#e#f flood"),
    };
    auto [kept, stats] = filter_pipeline(raw, cfg);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].doc_id == "2");
    CHECK(stats.input_count == 4);
    CHECK(stats.retweets_removed == 1);
    CHECK(stats.blocked == 1);
    CHECK(stats.no_allow_match == 0);
    CHECK(stats.spam_removed == 1);
    CHECK(stats.kept == 1);
    CHECK(stats.conserved());
}

TEST_CASE("filter_pipeline trivial cases") {
    auto cfg = FilterConfig::harvey_default();
    auto [kept, stats] = filter_pipeline({}, cfg);
    CHECK(kept.empty());
    CHECK(stats.input_count == 0);
    CHECK(stats.conserved());

    std::vector<Document> clean = {testsup::make_doc("a", "flood on main"),
                                   testsup::make_doc("b", "the bayou is flooding")};
    auto [kept2, stats2] = filter_pipeline(clean, cfg);
    CHECK(kept2.size() == clean.size());
    CHECK(stats2.kept == 2);
}

TEST_CASE("filter idempotence and stage precedence") {
    auto cfg = FilterConfig::harvey_default();
    std::mt19937_64 rng(20170825);
    std::vector<Document> raw;
    for (int i = 0; i < 300; ++i)
        raw.push_back(testsup::make_doc("d" + std::to_string(i), testsup::random_text(rng)));
    auto [kept, stats] = filter_pipeline(raw, cfg);
    auto [kept2, stats2] = filter_pipeline(kept, cfg);
    CHECK(kept2.size() == kept.size());
    CHECK(stats2.kept == stats2.input_count);
    CHECK(stats2.retweets_removed == 0);
    CHECK(stats2.blocked == 0);

    // a retweet carrying a block keyword counts as a retweet, never blocked
    std::vector<Document> rt = {testsup::make_doc("x", "RT @y spotify flood")};
    auto [kept3, stats3] = filter_pipeline(rt, cfg);
    CHECK(stats3.retweets_removed == 1);
    CHECK(stats3.blocked == 0);
}

TEST_CASE("filter stats conservation under fuzzing") {
    auto cfg = FilterConfig::harvey_default();
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
        std::vector<Document> raw;
        for (int i = 0; i < 40; ++i)
            raw.push_back(testsup::make_doc("d" + std::to_string(i), testsup::random_text(rng)));
        auto [kept, stats] = filter_pipeline(raw, cfg);
        CHECK(stats.conserved());
        for (const auto& doc : raw) {
            auto verdict = naive_classify(doc.text, cfg);
            const bool in_kept = std::any_of(kept.begin(), kept.end(), [&](const Document& d) {
                return d.doc_id == doc.doc_id;
            });
            CHECK(in_kept == (verdict.stage == NaiveVerdict::kept));
        }
    }
}

TEST_CASE("FilterConfig validation") {
    auto cfg = FilterConfig::harvey_default();
    CHECK_NOTHROW(cfg.validate());
    cfg.block_keywords.insert("flood");
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = FilterConfig::harvey_default();
    cfg.max_hashtags = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = FilterConfig::harvey_default();
    cfg.allow_keywords.insert("FLOOD");
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("jsonl ingest with skip rules") {
    testsup::TempDir tmp;
    auto path = tmp.path / "docs.jsonl";
    testsup::write_file(
        path,
        R"({"id":"t1","text":"flood on elm","timestamp":"2017-08-27T10:00:00Z","zip":"77001"})"
        "\n"
        R"({"id":"t2","timestamp":"2017-08-27T10:00:00Z"})"
        "\n"
        R"({"id":"t3","text":"bayou rising","timestamp":"2017-08-27T11:00:00Z","lat":29.76,"lon":-95.37})"
        "\n");
    auto store = ingest(path, IngestFormat::jsonl, Source::tweet);
    CHECK(store.size() == 2);
    CHECK(store.skipped() == 1);
    REQUIRE(store.find("t1"));
    CHECK(store.find("t1")->zip == "77001");
    REQUIRE(store.find("t3"));
    REQUIRE(store.find("t3")->geo.has_value());
    CHECK(store.find("t3")->geo->lat == doctest::Approx(29.76));
}

TEST_CASE("first unparseable record aborts with a diagnostic") {
    testsup::TempDir tmp;
    auto path = tmp.path / "bad.jsonl";
    testsup::write_file(path, "this is not json\n");
    CHECK_THROWS_AS(ingest(path, IngestFormat::jsonl, Source::tweet), std::runtime_error);

    auto csv_path = tmp.path / "bad.csv";
    testsup::write_file(csv_path, "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(ingest(csv_path, IngestFormat::csv, Source::tweet), std::runtime_error);
}

TEST_CASE("csv ingest equals its jsonl twin") {
    testsup::TempDir tmp;
    auto jsonl_path = tmp.path / "twin.jsonl";
    auto csv_path = tmp.path / "twin.csv";
    testsup::write_file(
        jsonl_path,
        R"({"id":"a","text":"flood at 5th","timestamp":"2017-08-27T01:00:00Z","zip":"77002"})"
        "\n"
        R"({"id":"b","text":"dry here","timestamp":"2017-08-28T02:00:00Z"})"
        "\n");
    testsup::write_file(csv_path, "id,text,zip,ts\n"
                                  "a,flood at 5th,77002,2017-08-27T01:00:00Z\n"
                                  "b,dry here,,2017-08-28T02:00:00Z\n");
    CsvHeaderMap map;
    map.timestamp = "ts";
    auto from_jsonl = ingest(jsonl_path, IngestFormat::jsonl, Source::tweet);
    auto from_csv = ingest(csv_path, IngestFormat::csv, Source::tweet, map);
    REQUIRE(from_jsonl.size() == from_csv.size());
    for (size_t i = 0; i < from_jsonl.size(); ++i) {
        CHECK(from_jsonl.at(i).doc_id == from_csv.at(i).doc_id);
        CHECK(from_jsonl.at(i).text == from_csv.at(i).text);
        CHECK(from_jsonl.at(i).zip == from_csv.at(i).zip);
        CHECK(from_jsonl.at(i).timestamp == from_csv.at(i).timestamp);
    }
}

TEST_CASE("store rejects duplicates and drops invalid zips") {
    DocumentStore store;
    CHECK(store.add(testsup::make_doc("a", "flood")));
    CHECK_FALSE(store.add(testsup::make_doc("a", "flood again")));
    CHECK(store.skipped() == 1);

    auto doc = testsup::make_doc("b", "street closed");
    doc.zip = "7710"; // four digits
    CHECK(store.add(std::move(doc)));
    CHECK_FALSE(store.find("b")->zip.has_value());
}
