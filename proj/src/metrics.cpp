#include "floodlens/metrics.hpp"

#include "floodlens/corpus.hpp"
#include "floodlens/csv.hpp"
#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace floodlens::eval {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<GroundTruthRow> load_ground_truth_csv(const std::filesystem::path& path) {
    auto rows = parse_csv(read_file(path.string()));
    if (rows.empty()) throw std::runtime_error(path.string() + ": empty ground truth file");
    std::vector<GroundTruthRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 2) continue;
        GroundTruthRow gt;
        gt.zip = row[0];
        try {
            gt.flooded_pct = std::stod(row[1]);
        } catch (const std::exception&) {
            continue;
        }
        if (row.size() >= 3 && !trim(row[2]).empty()) {
            try {
                gt.mean_pde = std::stod(row[2]);
            } catch (const std::exception&) {
                // damage truth stays absent
            }
        }
        out.push_back(std::move(gt));
    }
    return out;
}

std::string_view to_string(ConfigLabel c) {
    switch (c) {
        case ConfigLabel::text_only: return "text_only";
        case ConfigLabel::text_caption: return "text_caption";
        case ConfigLabel::multimodal: return "multimodal";
    }
    return "text_only";
}

std::optional<ConfigLabel> config_label_from_string(std::string_view s) {
    if (s == "text_only") return ConfigLabel::text_only;
    if (s == "text_caption") return ConfigLabel::text_caption;
    if (s == "multimodal") return ConfigLabel::multimodal;
    return std::nullopt;
}

namespace {

std::vector<double> abs_errors(const std::vector<EvalRecord>& records, Target target) {
    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& r : records) {
        if (target == Target::extent) {
            errors.push_back(std::fabs(r.predicted_extent - r.gt_extent));
        } else if (r.gt_damage) {
            errors.push_back(std::fabs(r.predicted_damage - *r.gt_damage));
        }
    }
    return errors;
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Linear interpolation between order statistics, q in [0,1].
double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

double mae(const std::vector<EvalRecord>& records, Target target) {
    auto errors = abs_errors(records, target);
    if (errors.empty()) throw std::invalid_argument("no usable records for MAE");
    return mean_of(errors);
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& errors, double level,
                                       int resamples, std::uint64_t seed) {
    if (errors.empty()) throw std::invalid_argument("bootstrap over empty errors");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
    if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");

    const std::size_t n = errors.size();
    std::mt19937_64 rng(seed);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += errors[rng() % n];
        m = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double alpha = (1.0 - level) / 2.0;
    return {percentile(means, alpha), percentile(means, 1.0 - alpha)};
}

MetricResult compute_metric(const std::vector<EvalRecord>& records, Target target,
                            std::uint64_t seed, int resamples) {
    auto errors = abs_errors(records, target);
    if (errors.empty()) throw std::invalid_argument("no usable records for metric");
    MetricResult m;
    m.mae = mean_of(errors);
    std::tie(m.ci_low, m.ci_high) = bootstrap_ci(errors, 0.95, resamples, seed);
    m.n = static_cast<int>(errors.size());
    m.seed = seed;
    return m;
}

std::vector<Query> load_queries_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<Query> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Query q;
        q.zip = j.at("zip").get<std::string>();
        auto start = parse_iso8601(j.at("start").get<std::string>());
        auto end = parse_iso8601(j.at("end").get<std::string>());
        if (!corpus::is_valid_zip(q.zip) || !start || !end || *end < *start)
            throw std::runtime_error(path.string() + ": bad query record " + line);
        q.window = {*start, *end};
        out.push_back(std::move(q));
    }
    return out;
}

AblationTable run_ablation(const std::vector<Query>& queries,
                           const std::vector<ConfigLabel>& configs, const AssessFn& assess,
                           const std::vector<GroundTruthRow>& ground_truth, std::uint64_t seed,
                           int resamples, int parallelism) {
    std::unordered_map<std::string, const GroundTruthRow*> gt_by_zip;
    for (const auto& gt : ground_truth) gt_by_zip[gt.zip] = &gt;

    AblationTable table;
    for (ConfigLabel config : configs) {
        std::vector<std::optional<Prediction>> results(queries.size());
        const int workers = std::max(1, parallelism);
        if (workers == 1) {
            for (std::size_t i = 0; i < queries.size(); ++i)
                results[i] = assess(queries[i], config);
        } else {
            std::vector<std::thread> pool;
            std::atomic<std::size_t> next{0};
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (;;) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= queries.size()) return;
                        results[i] = assess(queries[i], config);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }

        // single-threaded reduction in query order keeps runs reproducible
        std::vector<EvalRecord> records;
        records.reserve(queries.size());
        for (std::size_t i = 0; i < queries.size(); ++i) {
            if (!results[i]) {
                ++table.skipped;
                continue;
            }
            auto it = gt_by_zip.find(queries[i].zip);
            if (it == gt_by_zip.end()) {
                ++table.skipped;
                continue;
            }
            EvalRecord rec;
            rec.zip = queries[i].zip;
            rec.predicted_extent = results[i]->extent;
            rec.predicted_damage = results[i]->damage;
            rec.gt_extent = it->second->flooded_pct;
            if (it->second->mean_pde) rec.gt_damage = *it->second->mean_pde * 100.0;
            rec.config_label = config;
            records.push_back(std::move(rec));
        }

        for (Target target : {Target::extent, Target::damage}) {
            if (abs_errors(records, target).empty()) continue; // nothing usable for this cell
            table.cells.push_back({config, target, compute_metric(records, target, seed, resamples)});
        }
    }
    return table;
}

std::string ablation_to_csv(const AblationTable& table) {
    std::ostringstream out;
    out << "config,target,mae,ci_low,ci_high,n,seed\n";
    out.precision(17);
    for (const auto& cell : table.cells) {
        out << to_string(cell.config) << ','
            << (cell.target == Target::extent ? "extent" : "damage") << ',' << cell.metric.mae
            << ',' << cell.metric.ci_low << ',' << cell.metric.ci_high << ',' << cell.metric.n
            << ',' << cell.metric.seed << '\n';
    }
    return out.str();
}

RetrievalAudit retrieval_quality(const std::vector<std::vector<std::string>>& texts_per_query,
                                 const std::unordered_set<std::string>& allow_keywords,
                                 const std::vector<std::string>& gazetteer) {
    RetrievalAudit audit;
    audit.queries = texts_per_query.size();
    std::size_t topic_hits = 0, geo_hits = 0;
    for (const auto& texts : texts_per_query) {
        audit.total += texts.size();
        for (const auto& text : texts) {
            if (corpus::keyword_match(text, allow_keywords)) ++topic_hits;
            for (const auto& place : gazetteer) {
                if (contains_phrase(text, place)) {
                    ++geo_hits;
                    break;
                }
            }
        }
    }
    if (audit.total > 0) {
        audit.topic_pct = 100.0 * static_cast<double>(topic_hits) / audit.total;
        audit.geo_pct = 100.0 * static_cast<double>(geo_hits) / audit.total;
    }
    if (audit.queries > 0)
        audit.avg_per_query = static_cast<double>(audit.total) / audit.queries;
    return audit;
}

std::string predictions_to_geojson(const std::vector<EvalRecord>& records,
                                   const std::vector<geo::ZipRegion>& regions) {
    std::unordered_map<std::string, const geo::ZipRegion*> by_zip;
    for (const auto& r : regions) by_zip[r.zip] = &r;

    ordered_json fc;
    fc["type"] = "FeatureCollection";
    auto& features = fc["features"] = ordered_json::array();
    for (const auto& rec : records) {
        auto it = by_zip.find(rec.zip);
        if (it == by_zip.end()) continue;
        ordered_json f;
        f["type"] = "Feature";
        ordered_json props;
        props["zip"] = rec.zip;
        props["config"] = std::string(to_string(rec.config_label));
        props["predicted_extent"] = rec.predicted_extent;
        props["predicted_damage"] = rec.predicted_damage;
        props["gt_extent"] = rec.gt_extent;
        if (rec.gt_damage) props["gt_damage"] = *rec.gt_damage;
        f["properties"] = std::move(props);
        ordered_json coords = ordered_json::array();
        for (const auto& ring : it->second->rings) {
            ordered_json jring = ordered_json::array();
            for (const auto& p : ring) jring.push_back({p.lon, p.lat});
            coords.push_back(std::move(jring));
        }
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", std::move(coords)}};
        features.push_back(std::move(f));
    }
    return fc.dump(2);
}

} // namespace floodlens::eval
