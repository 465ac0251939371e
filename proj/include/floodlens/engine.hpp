#pragma once

#include "floodlens/chat.hpp"
#include "floodlens/corpus.hpp"
#include "floodlens/embedding.hpp"
#include "floodlens/fusion.hpp"
#include "floodlens/geo.hpp"
#include "floodlens/index.hpp"
#include "floodlens/metrics.hpp"
#include "floodlens/prompts.hpp"
#include "floodlens/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace floodlens::app {

struct DataPaths {
    std::filesystem::path tweets;       // filtered tweet corpus, JSONL
    std::filesystem::path calls_311;    // JSONL
    std::filesystem::path captions;     // JSONL
    std::filesystem::path tiles;        // JSONL tile metadata
    std::filesystem::path sensors;      // CSV
    std::filesystem::path zips;         // GeoJSON
    std::filesystem::path ground_truth; // CSV (eval only)
    std::filesystem::path embeddings;   // EMB1; optional
    std::filesystem::path fema_priors;  // CSV (zip, summary); optional
    std::filesystem::path prompts_dir;
};

struct RetrievalParams {
    std::size_t tweet_cap = 20;
    std::size_t call_cap = 20;
    std::size_t caption_cap = 6;
    std::size_t sparse_depth = 50;
    std::size_t dense_depth = 50;
    int rrf_k = 60;
    std::size_t rerank_limit = 20;
    double radius_km = 5.0;
    std::size_t min_tiles = 1;
    std::string extra_query_terms = "flooding flood water rescue damage road";
};

struct FusionParams {
    std::string peak_date = "2017-08-28";
    double extent_weight = 0.5;
    std::string default_start = "2017-08-25"; // chat adapter window when dates are absent
    std::string default_end = "2017-09-01";
};

struct EvalParams {
    std::uint64_t seed = 42;
    int resamples = 10000;
    int parallelism = 1;
    std::vector<std::string> gazetteer;
};

struct ClientSet {
    analyst::ClientConfig text_analyst;
    analyst::ClientConfig visual_analyst;
    analyst::ClientConfig query_parser; // falls back to text_analyst when unset
    std::string reranker_backend = "identity"; // "identity" | "http" | "none"
    std::string reranker_base_url;
    std::string embedder_backend = "mock"; // "mock" | "openai" | "none"
    std::string embedder_base_url;
    std::string embedder_model;
    std::size_t embedder_dimension = 384;
};

struct CacheParams {
    bool enabled = false;
};

struct EngineConfig {
    DataPaths paths;
    RetrievalParams retrieval;
    FusionParams fusion;
    corpus::FilterConfig filter = corpus::FilterConfig::harvey_default();
    ClientSet clients;
    EvalParams eval;
    CacheParams cache;
    std::uint64_t config_hash = 0; // fnv1a64 of the config file bytes

    // Parses the JSON config; relative paths resolve against the file's
    // directory; validates that referenced data paths exist.
    static EngineConfig load(const std::filesystem::path& path);
};

class UnknownZipError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AnalystFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AssessRequest {
    std::string zip;
    TimeWindow window;
    eval::ConfigLabel mode = eval::ConfigLabel::multimodal;
    bool bypass_cache = false;
};

using LogSink = std::function<void(const nlohmann::json&)>;

// Owns the immutable stores/indices plus the pluggable clients. Safe for
// concurrent assess() calls; the opt-in response cache is the only mutable
// state and sits behind a mutex.
class Engine {
public:
    static std::unique_ptr<Engine> load(EngineConfig cfg, LogSink log = {});

    // Full pipeline: retrieve -> bundle -> analyst call(s) -> parse -> fuse.
    // Deterministic under mock clients. Throws UnknownZipError / AnalystFailure.
    nlohmann::ordered_json assess(const AssessRequest& req);

    std::string assess_to_string(const AssessRequest& req); // dump(2) + newline

    eval::AblationTable run_eval(const std::vector<eval::Query>& queries,
                                 const std::vector<eval::ConfigLabel>& configs);

    // Retrieval-quality audit over the tweet lists each query would see.
    eval::RetrievalAudit audit_retrieval(const std::vector<eval::Query>& queries);

    const EngineConfig& config() const { return cfg_; }
    const corpus::DocumentStore& store() const { return store_; }
    const std::vector<geo::ZipRegion>& regions() const { return regions_; }
    analyst::ChatClient* text_client() { return text_client_.get(); }
    analyst::ChatClient* visual_client() { return visual_client_.get(); }
    analyst::ChatClient* parser_client() { return parser_client_.get(); }
    const analyst::PromptLibrary& prompts() const { return prompts_; }

    analyst::EvidenceBundle build_bundle(const std::string& zip, TimeWindow window,
                                         eval::ConfigLabel mode,
                                         index::HybridProvenance* tweet_prov = nullptr,
                                         index::HybridProvenance* call_prov = nullptr,
                                         bool* tile_fallback = nullptr);

private:
    Engine() = default;

    const geo::ZipRegion* find_region(const std::string& zip) const;
    std::optional<std::vector<float>> query_vector(const std::string& query) const;

    EngineConfig cfg_;
    LogSink log_;
    corpus::DocumentStore store_;
    std::optional<index::SparseIndex> sparse_;
    std::optional<index::DenseIndex> dense_;
    std::unique_ptr<index::Embedder> embedder_;
    std::unique_ptr<index::RerankScorer> reranker_;
    std::vector<geo::ZipRegion> regions_;
    std::unordered_map<std::string, std::size_t> region_by_zip_;
    std::vector<geo::SensorSite> sensors_;
    std::vector<geo::ImageryTile> tiles_;
    std::unordered_map<std::string, std::string> fema_priors_;
    analyst::PromptLibrary prompts_;
    std::unique_ptr<analyst::ChatClient> text_client_;
    std::unique_ptr<analyst::ChatClient> visual_client_;
    std::unique_ptr<analyst::ChatClient> parser_client_;

    std::mutex cache_mu_;
    std::unordered_map<std::string, std::string> cache_;
};

// POST /rerank {query, documents:[...]} -> {scores:[...]}
std::unique_ptr<index::RerankScorer> make_http_reranker(const std::string& base_url,
                                                        int timeout_s = 30);

} // namespace floodlens::app
