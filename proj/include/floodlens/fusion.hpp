#pragma once

#include "floodlens/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace floodlens::fusion {

enum class Branch { text_priority, weighted, text_only_fallback };

std::string_view to_string(Branch b);

struct FusionInput {
    analyst::AnalystReport text_report;
    std::optional<analyst::AnalystReport> visual_report;
    std::int64_t query_day = 0; // civil day of the query window's end
    std::int64_t peak_day = 0;  // civil day of the event's peak
    double extent_weight = 0.5; // text share of the weighted extent average
};

struct FusedAssessment {
    double flood_extent_pct = 0.0;
    double damage_severity_pct = 0.0;
    double confidence = 0.0; // min over contributing reports
    Branch branch_taken = Branch::text_only_fallback;
    analyst::EvidenceRefs merged_refs;
    std::string text_reasoning;
    std::string visual_reasoning;
};

double weighted_avg(double t, double v, double w);

// Extent: text wins outright when the query is past the peak and the visual
// report saw recession (post-event clear imagery must not veto real-time
// reports); otherwise the weighted average. Damage: max of both, since visual
// damage is persistent and text damage may be interior-only.
FusedAssessment fuse(const FusionInput& input);

} // namespace floodlens::fusion
