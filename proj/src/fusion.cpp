#include "floodlens/fusion.hpp"

#include <algorithm>
#include <stdexcept>

namespace floodlens::fusion {

std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::text_priority: return "text_priority";
        case Branch::weighted: return "weighted";
        case Branch::text_only_fallback: return "text_only_fallback";
    }
    return "weighted";
}

double weighted_avg(double t, double v, double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("weight must lie in [0,1]");
    return w * t + (1.0 - w) * v;
}

namespace {

void merge_refs(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& id : from)
        if (std::find(into.begin(), into.end(), id) == into.end()) into.push_back(id);
}

} // namespace

FusedAssessment fuse(const FusionInput& input) {
    const auto& text = input.text_report;
    FusedAssessment out;
    out.text_reasoning = text.reasoning;
    out.merged_refs = text.evidence_refs;

    if (!input.visual_report) {
        out.flood_extent_pct = text.flood_extent_pct;
        out.damage_severity_pct = text.damage_severity_pct;
        out.confidence = text.confidence;
        out.branch_taken = Branch::text_only_fallback;
        return out;
    }

    const auto& visual = *input.visual_report;
    out.visual_reasoning = visual.reasoning;
    merge_refs(out.merged_refs.imagery_tile_ids, visual.evidence_refs.imagery_tile_ids);
    merge_refs(out.merged_refs.tweet_ids, visual.evidence_refs.tweet_ids);
    merge_refs(out.merged_refs.call_311_ids, visual.evidence_refs.call_311_ids);
    merge_refs(out.merged_refs.sensor_ids, visual.evidence_refs.sensor_ids);
    merge_refs(out.merged_refs.kb_refs, visual.evidence_refs.kb_refs);

    if (input.query_day > input.peak_day && visual.recession_observed) {
        // post-peak recession imagery: the extent snapshot is stale
        out.flood_extent_pct = text.flood_extent_pct;
        out.branch_taken = Branch::text_priority;
    } else {
        out.flood_extent_pct =
            weighted_avg(text.flood_extent_pct, visual.flood_extent_pct, input.extent_weight);
        out.branch_taken = Branch::weighted;
    }
    out.damage_severity_pct = std::max(text.damage_severity_pct, visual.damage_severity_pct);
    out.confidence = std::min(text.confidence, visual.confidence);
    return out;
}

} // namespace floodlens::fusion
