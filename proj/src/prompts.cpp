#include "floodlens/prompts.hpp"

#include "floodlens/text_utils.hpp"

#include <cstdio>
#include <stdexcept>

namespace floodlens::analyst {

namespace {

constexpr const char* kNoneRetrieved = "None retrieved";

std::string load_template(const std::filesystem::path& dir, const char* name) {
    auto path = dir / name;
    if (!std::filesystem::exists(path))
        throw std::runtime_error("missing prompt template: " + path.string());
    return read_file(path.string());
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

// Replaces the per-item pattern line plus its "..." continuation with one
// rendered line per item (or the none marker).
void expand_repeated(std::string& tpl, std::string_view pattern_marker,
                     const std::vector<std::string>& lines) {
    const std::size_t start = tpl.find(pattern_marker);
    if (start == std::string::npos) return;
    const std::size_t line_start = tpl.rfind('\n', start) + 1;
    std::size_t line_end = tpl.find('\n', start);
    if (line_end == std::string::npos) line_end = tpl.size();
    // swallow the "..." line that follows the pattern
    std::size_t block_end = line_end;
    if (block_end < tpl.size()) {
        std::size_t next_end = tpl.find('\n', block_end + 1);
        if (next_end == std::string::npos) next_end = tpl.size();
        if (tpl.substr(block_end + 1, next_end - block_end - 1) == "...") block_end = next_end;
    }
    std::string rendered;
    if (lines.empty()) {
        rendered = kNoneRetrieved;
    } else {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            rendered += lines[i];
            if (i + 1 < lines.size()) rendered += '\n';
        }
    }
    tpl.replace(line_start, block_end - line_start, rendered);
}

std::string join_ids(const std::vector<std::string>& ids) {
    if (ids.empty()) return "None";
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += ids[i];
        if (i + 1 < ids.size()) out += ", ";
    }
    return out;
}

} // namespace

bool EvidenceBundle::has_id(std::string_view id) const {
    for (const auto& [doc_id, text] : tweets)
        if (doc_id == id) return true;
    for (const auto& [doc_id, text] : calls_311)
        if (doc_id == id) return true;
    for (const auto& [tile_id, caption] : captions)
        if (tile_id == id) return true;
    for (const auto& tile_id : tiles)
        if (tile_id == id) return true;
    if (!sensor_id.empty() && sensor_id == id) return true;
    if (!fema_ref.empty() && fema_ref == id) return true;
    return false;
}

bool EvidenceBundle::empty_evidence() const {
    return tweets.empty() && calls_311.empty() && captions.empty() && sensor_rows.empty() &&
           tiles.empty();
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    lib.system_multimodal_ = load_template(dir, "system_multimodal.txt");
    lib.system_text_only_ = load_template(dir, "system_text_only.txt");
    lib.user_template_ = load_template(dir, "user_template.txt");
    lib.query_parser_system_ = load_template(dir, "query_parser_system.txt");
    lib.query_parser_user_ = load_template(dir, "query_parser_user.txt");
    return lib;
}

const std::string& PromptLibrary::system_prompt(PromptMode mode) const {
    return mode == PromptMode::multimodal ? system_multimodal_ : system_text_only_;
}

std::uint64_t PromptLibrary::checksum(PromptMode mode) const {
    return fnv1a64(system_prompt(mode));
}

std::string render_sensor_table(const std::string& sensor_id,
                                const std::vector<geo::SensorReading>& rows) {
    if (sensor_id.empty() || rows.empty()) return kNoneRetrieved;
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.1f", rows[i].precip_in);
        out += "- [" + sensor_id + "] " + format_iso8601(rows[i].hour) + ": " + buf + " inches";
        if (i + 1 < rows.size()) out += '\n';
    }
    return out;
}

std::string PromptLibrary::user_prompt(const EvidenceBundle& bundle) const {
    std::string tpl = user_template_;

    // scalar placeholders first; evidence text is inserted afterwards and is
    // never scanned for placeholders
    replace_all(tpl, "{start_date}", format_compact(bundle.window.start));
    replace_all(tpl, "{zip_code}", bundle.zip);
    replace_all(tpl, "{start}", format_compact(bundle.window.start));
    replace_all(tpl, "{end}", format_compact(bundle.window.end));
    replace_all(tpl, "{imagery_tile_ids}", join_ids(bundle.tiles));
    replace_all(tpl, "{sensor_table}", render_sensor_table(bundle.sensor_id, bundle.sensor_rows));
    replace_all(tpl, "{kb_summary}",
                bundle.fema_prior ? *bundle.fema_prior : std::string("None available."));

    std::vector<std::string> tweet_lines;
    tweet_lines.reserve(bundle.tweets.size());
    for (const auto& [id, text] : bundle.tweets)
        tweet_lines.push_back("- [" + id + "] (ZIP " + bundle.zip + ") " + text);
    expand_repeated(tpl, "{tweet_id}", tweet_lines);

    std::vector<std::string> call_lines;
    call_lines.reserve(bundle.calls_311.size());
    for (const auto& [id, text] : bundle.calls_311)
        call_lines.push_back("- [" + id + "] (ZIP " + bundle.zip + ") " + text);
    expand_repeated(tpl, "{call_id}", call_lines);

    std::vector<std::string> caption_lines;
    caption_lines.reserve(bundle.captions.size());
    for (const auto& [tile_id, caption] : bundle.captions)
        caption_lines.push_back("- [" + tile_id + "] " + caption);
    std::string caption_block;
    if (caption_lines.empty()) {
        caption_block = kNoneRetrieved;
    } else {
        for (std::size_t i = 0; i < caption_lines.size(); ++i) {
            caption_block += caption_lines[i];
            if (i + 1 < caption_lines.size()) caption_block += '\n';
        }
    }
    replace_all(tpl, "{caption_list}", caption_block);
    return tpl;
}

std::string PromptLibrary::visual_user_prompt(const EvidenceBundle& bundle) const {
    std::string prompt = user_prompt(bundle);
    prompt +=
        "\nAdditionally include in \"estimates\": \"recession_observed\": bool, true if the "
        "imagery shows floodwaters have receded from earlier peak levels.\n";
    return prompt;
}

std::string PromptLibrary::query_parser_user(const std::string& message) const {
    std::string out = query_parser_user_;
    replace_all(out, "{message}", message);
    return out;
}

} // namespace floodlens::analyst
