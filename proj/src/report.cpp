#include "floodlens/report.hpp"

#include "floodlens/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace floodlens::analyst {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// First parseable balanced JSON object in the text.
std::optional<json> extract_json_object(const std::string& raw) {
    for (std::size_t start = raw.find('{'); start != std::string::npos;
         start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                json j = json::parse(raw.substr(start, i - start + 1), nullptr, false);
                if (!j.is_discarded() && j.is_object()) return j;
                break;
            }
        }
    }
    return std::nullopt;
}

double clamp_flagged(double v, double lo, double hi, const char* flag,
                     std::vector<std::string>& flags) {
    if (v < lo || v > hi) {
        flags.emplace_back(flag);
        return std::clamp(v, lo, hi);
    }
    return v;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return out;
    for (const auto& v : *it) {
        if (v.is_string()) out.push_back(v.get<std::string>());
        else if (v.is_number_integer()) out.push_back(std::to_string(v.get<std::int64_t>()));
    }
    return out;
}

} // namespace

AnalystReport parse_report(const std::string& raw, bool after_peak_hint) {
    auto obj = extract_json_object(raw);
    if (!obj) throw ReportParseError("no JSON object found in analyst output");
    const json& j = *obj;

    auto est_it = j.find("estimates");
    const json& est = (est_it != j.end() && est_it->is_object()) ? *est_it : j;

    auto num = [&](const char* key) -> std::optional<double> {
        auto it = est.find(key);
        if (it != est.end() && it->is_number()) return it->get<double>();
        return std::nullopt;
    };
    auto extent = num("flood_extent_pct");
    auto damage = num("damage_severity_pct");
    if (!extent || !damage)
        throw ReportParseError("estimates.flood_extent_pct / damage_severity_pct missing");

    AnalystReport r;
    r.flood_extent_pct = clamp_flagged(*extent, 0.0, 100.0, "clamped_flood_extent", r.parse_flags);
    r.damage_severity_pct =
        clamp_flagged(*damage, 0.0, 100.0, "clamped_damage_severity", r.parse_flags);

    if (auto conf = num("confidence")) {
        r.confidence = clamp_flagged(*conf, 0.0, 1.0, "clamped_confidence", r.parse_flags);
    } else {
        r.confidence = 0.5;
        r.parse_flags.emplace_back("confidence_missing");
    }

    const json* rec = nullptr;
    if (auto it = est.find("recession_observed"); it != est.end() && it->is_boolean())
        rec = &*it;
    else if (auto it2 = j.find("recession_observed"); it2 != j.end() && it2->is_boolean())
        rec = &*it2;
    if (rec) {
        r.recession_observed = rec->get<bool>();
    } else {
        r.recession_observed = r.flood_extent_pct < 5.0 && after_peak_hint;
        r.parse_flags.emplace_back("recession_inferred");
    }

    r.roads_impacted = string_list(est, "roads_impacted");
    if (j.contains("reasoning") && j["reasoning"].is_string())
        r.reasoning = j["reasoning"].get<std::string>();
    if (j.contains("natural_language_summary") && j["natural_language_summary"].is_string())
        r.natural_language_summary = j["natural_language_summary"].get<std::string>();

    if (auto refs_it = j.find("evidence_refs"); refs_it != j.end() && refs_it->is_object()) {
        const json& refs = *refs_it;
        r.evidence_refs.imagery_tile_ids = string_list(refs, "imagery_tile_ids");
        r.evidence_refs.tweet_ids = string_list(refs, "tweet_ids");
        r.evidence_refs.call_311_ids = string_list(refs, "call_311_ids");
        r.evidence_refs.sensor_ids = string_list(refs, "sensor_ids");
        r.evidence_refs.kb_refs = string_list(refs, "kb_refs");
    }
    return r;
}

std::string render_report(const AnalystReport& r) {
    ordered_json j;
    j["reasoning"] = r.reasoning;
    j["estimates"] = {{"flood_extent_pct", r.flood_extent_pct},
                      {"damage_severity_pct", r.damage_severity_pct},
                      {"recession_observed", r.recession_observed},
                      {"roads_impacted", r.roads_impacted},
                      {"confidence", r.confidence}};
    j["evidence_refs"] = {{"imagery_tile_ids", r.evidence_refs.imagery_tile_ids},
                          {"tweet_ids", r.evidence_refs.tweet_ids},
                          {"call_311_ids", r.evidence_refs.call_311_ids},
                          {"sensor_ids", r.evidence_refs.sensor_ids},
                          {"kb_refs", r.evidence_refs.kb_refs}};
    j["natural_language_summary"] = r.natural_language_summary;
    return j.dump();
}

std::size_t sanitize_evidence_refs(AnalystReport& report, const EvidenceBundle& bundle) {
    std::size_t removed = 0;
    auto strip = [&](std::vector<std::string>& ids) {
        auto keep_end = std::remove_if(ids.begin(), ids.end(), [&](const std::string& id) {
            return !bundle.has_id(id);
        });
        removed += static_cast<std::size_t>(ids.end() - keep_end);
        ids.erase(keep_end, ids.end());
    };
    strip(report.evidence_refs.imagery_tile_ids);
    strip(report.evidence_refs.tweet_ids);
    strip(report.evidence_refs.call_311_ids);
    strip(report.evidence_refs.sensor_ids);
    strip(report.evidence_refs.kb_refs);
    if (removed > 0) report.parse_flags.push_back("stripped_refs:" + std::to_string(removed));
    return removed;
}

ParsedQuery parse_user_query(const std::string& message, ChatClient& client,
                             const PromptLibrary& prompts) {
    ParsedQuery q;
    std::string raw;
    try {
        raw = client.complete({{"system", prompts.query_parser_system(), {}},
                               {"user", prompts.query_parser_user(message), {}}});
    } catch (const std::exception& e) {
        q.parse_failed = true;
        q.diagnostic = std::string("query parser call failed: ") + e.what();
        return q;
    }

    auto obj = extract_json_object(raw);
    if (!obj) {
        q.parse_failed = true;
        q.diagnostic = "query parser returned no JSON object";
        return q;
    }
    const json& j = *obj;
    auto str_or_null = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };
    if (auto zip = str_or_null("zip"); zip && corpus::is_valid_zip(*zip)) q.zip = *zip;
    if (auto s = str_or_null("start")) q.start = parse_iso8601(*s);
    if (auto e = str_or_null("end")) q.end = parse_iso8601(*e);

    // single mentioned date covers the whole window
    if (q.start && !q.end) q.end = q.start;
    if (q.end && !q.start) q.start = q.end;
    if (q.start && q.end && *q.end < *q.start) std::swap(q.start, q.end);
    return q;
}

} // namespace floodlens::analyst
