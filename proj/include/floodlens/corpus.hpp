#pragma once

#include "floodlens/time_utils.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace floodlens::corpus {

enum class Source { tweet, call_311, caption, sensor_note };

std::string_view to_string(Source s);
std::optional<Source> source_from_string(std::string_view s);

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

// One retrievable evidence item. `text` is stored as received (minus outer
// whitespace); all matching happens on a normalized view.
struct Document {
    std::string doc_id;
    Source source = Source::tweet;
    std::string text;
    std::optional<std::string> zip; // exactly five ASCII digits when present
    UtcTime timestamp;
    std::optional<GeoPoint> geo;
};

bool is_valid_zip(std::string_view zip);

struct FilterConfig {
    std::unordered_set<std::string> allow_keywords;
    std::unordered_set<std::string> block_keywords;
    int max_hashtags = 5;
    int max_urls = 3;

    // The shipped Hurricane Harvey allow/block lists.
    static FilterConfig harvey_default();
    // Throws std::invalid_argument on overlap, non-lowercase entries, or
    // thresholds below 1.
    void validate() const;
};

struct FilterStats {
    std::uint64_t input_count = 0;
    std::uint64_t retweets_removed = 0;
    std::uint64_t blocked = 0;
    std::uint64_t no_allow_match = 0;
    std::uint64_t spam_removed = 0;
    std::uint64_t kept = 0;

    bool conserved() const {
        return input_count == retweets_removed + blocked + no_allow_match + spam_removed + kept;
    }
};

// True iff the text, after trimming leading whitespace, starts with "RT @"
// (case-insensitive).
bool is_retweet(std::string_view text);

// Whole-word, case-insensitive match: any keyword equal to some alphanumeric
// token of the text. Keywords must be lowercase.
bool keyword_match(std::string_view text, const std::unordered_set<std::string>& keywords);

// Hashtag count above max_hashtags or URL count above max_urls.
bool is_spam(std::string_view text, const FilterConfig& cfg);

// Stages in order: retweet removal, block list, allow-list requirement, spam.
// A document removed at one stage is never counted at a later one.
std::pair<std::vector<Document>, FilterStats> filter_pipeline(const std::vector<Document>& raw,
                                                              const FilterConfig& cfg);

class DocumentStore {
public:
    // False (and a skip count bump) on duplicate doc_id or empty text.
    bool add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    const Document& at(std::size_t i) const { return docs_[i]; }
    const Document* find(std::string_view doc_id) const;
    const std::vector<Document>& docs() const { return docs_; }

    std::uint64_t skipped() const { return skipped_; }
    void note_skipped() { ++skipped_; }

    auto begin() const { return docs_.begin(); }
    auto end() const { return docs_.end(); }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::uint64_t skipped_ = 0;
};

enum class IngestFormat { jsonl, csv };

// Field -> column-name mapping for CSV ingestion.
struct CsvHeaderMap {
    std::string id = "id";
    std::string text = "text";
    std::string zip = "zip";
    std::string timestamp = "timestamp";
    std::string lat = "lat";
    std::string lon = "lon";
};

// Malformed records are counted and skipped; an unparseable FIRST record is
// treated as a format mismatch and aborts with a diagnostic.
DocumentStore ingest(const std::filesystem::path& path, IngestFormat format, Source source,
                     const CsvHeaderMap& header_map = {});

void append_store(DocumentStore& store, const std::filesystem::path& path, IngestFormat format,
                  Source source, const CsvHeaderMap& header_map = {});

std::string to_jsonl(const Document& doc);
void save_jsonl(const DocumentStore& store, const std::filesystem::path& path);

} // namespace floodlens::corpus
