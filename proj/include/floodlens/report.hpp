#pragma once

#include "floodlens/chat.hpp"
#include "floodlens/prompts.hpp"
#include "floodlens/time_utils.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace floodlens::analyst {

struct EvidenceRefs {
    std::vector<std::string> imagery_tile_ids;
    std::vector<std::string> tweet_ids;
    std::vector<std::string> call_311_ids;
    std::vector<std::string> sensor_ids;
    std::vector<std::string> kb_refs;
};

struct AnalystReport {
    double flood_extent_pct = 0.0;   // [0,100]
    double damage_severity_pct = 0.0; // [0,100]
    bool recession_observed = false;
    double confidence = 0.5; // [0,1]
    std::vector<std::string> roads_impacted;
    std::string reasoning;
    std::string natural_language_summary;
    EvidenceRefs evidence_refs;
    std::vector<std::string> parse_flags; // clamped_*, confidence_missing, recession_inferred
};

class ReportParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pulls the first JSON object out of the raw model text (code fences and
// prose tolerated), validates the estimate fields, clamps ranges with flags.
// A missing recession flag is inferred as (extent < 5 && after_peak_hint).
AnalystReport parse_report(const std::string& raw, bool after_peak_hint = false);

// Report back to its wire JSON. parse_report(render_report(r)) == r for any
// valid report.
std::string render_report(const AnalystReport& report);

// Drops evidence_refs entries that name ids absent from the bundle.
// Returns how many were removed.
std::size_t sanitize_evidence_refs(AnalystReport& report, const EvidenceBundle& bundle);

struct ParsedQuery {
    std::optional<std::string> zip;
    std::optional<UtcTime> start;
    std::optional<UtcTime> end;
    bool parse_failed = false;
    std::string diagnostic;
};

// Runs the query-parsing prompt through the given client. Model garbage comes
// back as an all-null ParsedQuery with a diagnostic, never a throw.
ParsedQuery parse_user_query(const std::string& message, ChatClient& client,
                             const PromptLibrary& prompts);

} // namespace floodlens::analyst
