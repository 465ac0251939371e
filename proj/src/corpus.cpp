#include "floodlens/corpus.hpp"

#include "floodlens/csv.hpp"
#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace floodlens::corpus {

using nlohmann::json;

std::string_view to_string(Source s) {
    switch (s) {
        case Source::tweet: return "tweet";
        case Source::call_311: return "call_311";
        case Source::caption: return "caption";
        case Source::sensor_note: return "sensor_note";
    }
    return "tweet";
}

std::optional<Source> source_from_string(std::string_view s) {
    if (s == "tweet") return Source::tweet;
    if (s == "call_311") return Source::call_311;
    if (s == "caption") return Source::caption;
    if (s == "sensor_note") return Source::sensor_note;
    return std::nullopt;
}

bool is_valid_zip(std::string_view zip) {
    if (zip.size() != 5) return false;
    for (char c : zip)
        if (c < '0' || c > '9') return false;
    return true;
}

FilterConfig FilterConfig::harvey_default() {
    FilterConfig cfg;
    cfg.allow_keywords = {"flood",   "flooding", "flooded",   "hurricane", "storm",  "rain",
                          "underwater", "rescue", "trapped",  "stuck",     "help",   "emergency",
                          "911",     "evacuate", "damage",    "collapsed", "power",  "outage",
                          "road",    "bridge",   "bayou",     "creek"};
    cfg.block_keywords = {"spotify", "music",    "song",     "album",    "lyrics", "vote",
                          "election", "trump",   "biden",    "president", "giveaway", "contest",
                          "win",     "sale",     "shirt",    "merch",    "game",   "nfl",
                          "nba",     "football", "baseball", "love",     "heart",  "tears"};
    return cfg;
}

void FilterConfig::validate() const {
    if (max_hashtags < 1) throw std::invalid_argument("max_hashtags must be >= 1");
    if (max_urls < 1) throw std::invalid_argument("max_urls must be >= 1");
    for (const auto& k : allow_keywords) {
        if (k != ascii_lower(k)) throw std::invalid_argument("allow keyword not lowercase: " + k);
        if (block_keywords.count(k))
            throw std::invalid_argument("keyword in both allow and block lists: " + k);
    }
    for (const auto& k : block_keywords)
        if (k != ascii_lower(k)) throw std::invalid_argument("block keyword not lowercase: " + k);
}

bool is_retweet(std::string_view text) {
    size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (text.size() - i < 4) return false;
    return (text[i] == 'R' || text[i] == 'r') && (text[i + 1] == 'T' || text[i + 1] == 't') &&
           text[i + 2] == ' ' && text[i + 3] == '@';
}

bool keyword_match(std::string_view text, const std::unordered_set<std::string>& keywords) {
    for (const auto& tok : tokenize(text))
        if (keywords.count(tok)) return true;
    return false;
}

bool is_spam(std::string_view text, const FilterConfig& cfg) {
    if (count_occurrences(text, "#") > static_cast<size_t>(cfg.max_hashtags)) return true;
    size_t urls = count_occurrences(text, "http://") + count_occurrences(text, "https://");
    return urls > static_cast<size_t>(cfg.max_urls);
}

std::pair<std::vector<Document>, FilterStats> filter_pipeline(const std::vector<Document>& raw,
                                                              const FilterConfig& cfg) {
    FilterStats stats;
    stats.input_count = raw.size();
    std::vector<Document> kept;
    kept.reserve(raw.size());
    for (const auto& doc : raw) {
        if (is_retweet(doc.text)) {
            ++stats.retweets_removed;
        } else if (keyword_match(doc.text, cfg.block_keywords)) {
            ++stats.blocked;
        } else if (!keyword_match(doc.text, cfg.allow_keywords)) {
            ++stats.no_allow_match;
        } else if (is_spam(doc.text, cfg)) {
            ++stats.spam_removed;
        } else {
            kept.push_back(doc);
        }
    }
    stats.kept = kept.size();
    return {std::move(kept), stats};
}

bool DocumentStore::add(Document doc) {
    if (doc.doc_id.empty() || trim(doc.text).empty() || by_id_.count(doc.doc_id)) {
        ++skipped_;
        return false;
    }
    if (doc.zip && !is_valid_zip(*doc.zip)) doc.zip.reset();
    by_id_.emplace(doc.doc_id, docs_.size());
    docs_.push_back(std::move(doc));
    return true;
}

const Document* DocumentStore::find(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

namespace {

// Returns false when the record is malformed (missing id/text/timestamp).
bool doc_from_json(const json& j, Source source, Document& out) {
    if (!j.is_object()) return false;
    auto get_str = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end()) return std::nullopt;
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
        return std::nullopt;
    };
    auto id = get_str("id");
    auto text = get_str("text");
    auto ts = get_str("timestamp");
    if (!id || !text || !ts || trim(*text).empty()) return false;
    auto when = parse_iso8601(*ts);
    if (!when) return false;

    out.doc_id = *id;
    out.source = source;
    out.text = std::string(trim(*text));
    out.timestamp = *when;
    out.zip.reset();
    out.geo.reset();
    if (auto zip = get_str("zip"); zip && is_valid_zip(*zip)) out.zip = *zip;
    auto lat = j.find("lat");
    auto lon = j.find("lon");
    if (lat != j.end() && lon != j.end() && lat->is_number() && lon->is_number()) {
        GeoPoint p{lat->get<double>(), lon->get<double>()};
        if (p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0) out.geo = p;
    }
    return true;
}

void ingest_jsonl(DocumentStore& store, const std::filesystem::path& path, Source source) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    bool first_record = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        Document doc;
        bool ok = !j.is_discarded() && doc_from_json(j, source, doc);
        if (first_record && !ok)
            throw std::runtime_error("format mismatch: first record of " + path.string() +
                                     " is not a valid JSONL document");
        first_record = false;
        if (ok) store.add(std::move(doc));
        else store.note_skipped();
    }
}

void ingest_csv(DocumentStore& store, const std::filesystem::path& path, Source source,
                const CsvHeaderMap& map) {
    auto rows = parse_csv(read_file(path.string()));
    if (rows.empty()) throw std::runtime_error("format mismatch: " + path.string() + " is empty");
    const auto& header = rows[0];
    auto col = [&](const std::string& name) -> int {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int c_id = col(map.id), c_text = col(map.text), c_zip = col(map.zip),
        c_ts = col(map.timestamp), c_lat = col(map.lat), c_lon = col(map.lon);
    if (c_id < 0 || c_text < 0 || c_ts < 0)
        throw std::runtime_error("format mismatch: " + path.string() +
                                 " header lacks required columns (" + map.id + ", " + map.text +
                                 ", " + map.timestamp + ")");

    auto cell = [](const std::vector<std::string>& row, int c) -> std::string {
        return (c >= 0 && static_cast<size_t>(c) < row.size()) ? row[c] : std::string();
    };
    bool first_record = true;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        Document doc;
        doc.doc_id = cell(row, c_id);
        doc.source = source;
        doc.text = std::string(trim(cell(row, c_text)));
        auto when = parse_iso8601(cell(row, c_ts));
        bool ok = !doc.doc_id.empty() && !doc.text.empty() && when.has_value();
        if (first_record && !ok)
            throw std::runtime_error("format mismatch: first data row of " + path.string() +
                                     " is not a valid record");
        first_record = false;
        if (!ok) {
            store.note_skipped();
            continue;
        }
        doc.timestamp = *when;
        if (auto zip = cell(row, c_zip); is_valid_zip(zip)) doc.zip = zip;
        std::string lat = cell(row, c_lat), lon = cell(row, c_lon);
        if (!lat.empty() && !lon.empty()) {
            try {
                GeoPoint p{std::stod(lat), std::stod(lon)};
                if (p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0)
                    doc.geo = p;
            } catch (const std::exception&) {
                // coordinates are optional; bad values just drop the geo tag
            }
        }
        store.add(std::move(doc));
    }
}

} // namespace

void append_store(DocumentStore& store, const std::filesystem::path& path, IngestFormat format,
                  Source source, const CsvHeaderMap& header_map) {
    if (format == IngestFormat::jsonl) ingest_jsonl(store, path, source);
    else ingest_csv(store, path, source, header_map);
}

DocumentStore ingest(const std::filesystem::path& path, IngestFormat format, Source source,
                     const CsvHeaderMap& header_map) {
    DocumentStore store;
    append_store(store, path, format, source, header_map);
    return store;
}

std::string to_jsonl(const Document& doc) {
    json j;
    j["id"] = doc.doc_id;
    j["text"] = doc.text;
    j["timestamp"] = format_iso8601(doc.timestamp);
    j["source"] = std::string(to_string(doc.source));
    if (doc.zip) j["zip"] = *doc.zip;
    if (doc.geo) {
        j["lat"] = doc.geo->lat;
        j["lon"] = doc.geo->lon;
    }
    return j.dump();
}

void save_jsonl(const DocumentStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& doc : store) out << to_jsonl(doc) << '\n';
}

} // namespace floodlens::corpus
