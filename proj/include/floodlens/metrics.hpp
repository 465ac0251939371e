#pragma once

#include "floodlens/geo.hpp"
#include "floodlens/time_utils.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace floodlens::eval {

struct GroundTruthRow {
    std::string zip;
    double flooded_pct = 0.0;            // [0,100]
    std::optional<double> mean_pde;      // [0,1]; absent where damage truth is missing
};

// CSV columns: zip, flooded_pct, mean_pde (empty cell = absent).
std::vector<GroundTruthRow> load_ground_truth_csv(const std::filesystem::path& path);

enum class ConfigLabel { text_only, text_caption, multimodal };

std::string_view to_string(ConfigLabel c);
std::optional<ConfigLabel> config_label_from_string(std::string_view s);

struct EvalRecord {
    std::string zip;
    double predicted_extent = 0.0;
    double predicted_damage = 0.0;
    double gt_extent = 0.0;
    std::optional<double> gt_damage; // mean_pde x 100
    ConfigLabel config_label = ConfigLabel::text_only;
};

enum class Target { extent, damage };

// Mean |pred - gt| over records carrying ground truth for the target; damage
// rows without mean_pde are skipped. Throws when nothing is usable.
double mae(const std::vector<EvalRecord>& records, Target target);

// Percentile bootstrap of the mean: `resamples` draws with replacement, take
// means, return the (1-level)/2 and (1+level)/2 percentiles. Deterministic
// for a given seed (mt19937_64 with modulo index draws, linear-interpolated
// percentiles).
std::pair<double, double> bootstrap_ci(const std::vector<double>& errors, double level = 0.95,
                                       int resamples = 10000, std::uint64_t seed = 0);

struct MetricResult {
    double mae = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n = 0;
    std::uint64_t seed = 0;
};

MetricResult compute_metric(const std::vector<EvalRecord>& records, Target target,
                            std::uint64_t seed, int resamples);

struct Query {
    std::string zip;
    TimeWindow window;
};

std::vector<Query> load_queries_jsonl(const std::filesystem::path& path);

struct Prediction {
    double extent = 0.0;
    double damage = 0.0;
};

// One engine pass for one query under one ablation configuration; nullopt
// marks a per-query failure (skipped, counted).
using AssessFn = std::function<std::optional<Prediction>(const Query&, ConfigLabel)>;

struct AblationCell {
    ConfigLabel config;
    Target target;
    MetricResult metric;
};

struct AblationTable {
    std::vector<AblationCell> cells;
    std::size_t skipped = 0;
};

AblationTable run_ablation(const std::vector<Query>& queries,
                           const std::vector<ConfigLabel>& configs, const AssessFn& assess,
                           const std::vector<GroundTruthRow>& ground_truth, std::uint64_t seed,
                           int resamples, int parallelism = 1);

std::string ablation_to_csv(const AblationTable& table);

struct RetrievalAudit {
    double topic_pct = 0.0;     // % of retrieved texts with >=1 allow keyword
    double geo_pct = 0.0;       // % with >=1 gazetteer mention
    double avg_per_query = 0.0;
    std::size_t total = 0;
    std::size_t queries = 0;
};

RetrievalAudit retrieval_quality(const std::vector<std::vector<std::string>>& texts_per_query,
                                 const std::unordered_set<std::string>& allow_keywords,
                                 const std::vector<std::string>& gazetteer);

// Joins per-zip predictions onto ZIP polygons for external map rendering.
std::string predictions_to_geojson(const std::vector<EvalRecord>& records,
                                   const std::vector<geo::ZipRegion>& regions);

} // namespace floodlens::eval
