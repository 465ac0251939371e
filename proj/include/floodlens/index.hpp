#pragma once

#include "floodlens/corpus.hpp"
#include "floodlens/time_utils.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace floodlens::index {

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

// Always ordered score descending, doc_id ascending on ties; no duplicates.
using Ranking = std::vector<ScoredDoc>;

void sort_ranking(Ranking& r);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Okapi BM25 inverted index. Build once, search concurrently.
class SparseIndex {
public:
    static SparseIndex build(const corpus::DocumentStore& store, Bm25Params params = {});

    // Duplicate query terms count once. Only documents sharing at least one
    // term with the query appear. restrict_ids, when given, drops everything
    // outside the set before scoring.
    Ranking search(std::string_view query, std::size_t top_k,
                   const std::unordered_set<std::string>* restrict_ids = nullptr) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_len_; }
    const Bm25Params& params() const { return params_; }
    std::uint32_t doc_length(std::string_view doc_id) const;
    std::uint32_t term_frequency(std::string_view term, std::string_view doc_id) const;

    void save_jsonl(const std::filesystem::path& path) const;
    static SparseIndex load_jsonl(const std::filesystem::path& path);

private:
    // term -> (doc index, tf) in document insertion order
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::uint32_t> index_of_;
    double avg_len_ = 0.0;
    Bm25Params params_;
};

// Flat (exact) cosine-similarity index over fixed-dimension vectors. Vectors
// are L2-normalized on insert; zero vectors are rejected.
class DenseIndex {
public:
    explicit DenseIndex(std::size_t dimension = 384);

    void add(std::string doc_id, std::span<const float> vec);
    Ranking search(std::span<const float> query, std::size_t top_k,
                   const std::unordered_set<std::string>* restrict_ids = nullptr) const;

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool contains(std::string_view doc_id) const;
    std::span<const float> vector_of(std::string_view doc_id) const;

    // Binary snapshot: magic "EMB1", u32 count, u32 dimension, then per record
    // u32 id length, id bytes, dimension float32 values. Little-endian.
    void save_emb1(const std::filesystem::path& path) const;
    static DenseIndex load_emb1(const std::filesystem::path& path);

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<float> flat_; // ids_.size() * dim_
    std::unordered_map<std::string, std::size_t> index_of_;
};

struct RrfConfig {
    int k = 60;
};

// score(doc) = sum over input rankings containing doc of 1/(k + rank),
// rank 1-based.
Ranking rrf_fuse(const std::vector<Ranking>& rankings, RrfConfig cfg = {},
                 std::size_t top_k = SIZE_MAX);

// Scores (query, document-text) pairs; one score per input text.
// Implementations may throw; callers treat that as scorer failure.
class RerankScorer {
public:
    virtual ~RerankScorer() = default;
    virtual std::vector<double> score(const std::string& query,
                                      const std::vector<std::string>& texts) = 0;
};

// Strictly decreasing positional scores, so reranking with it is a no-op on
// order even under the global id tie-break.
class IdentityRerankScorer : public RerankScorer {
public:
    std::vector<double> score(const std::string&, const std::vector<std::string>& texts) override;
};

struct RerankResult {
    Ranking ranking;
    bool fallback = false; // scorer failed; input order truncated instead
};

RerankResult rerank(const std::string& query, const Ranking& candidates,
                    const corpus::DocumentStore& store, RerankScorer& scorer,
                    std::size_t limit = 20);

struct HybridFilters {
    std::optional<std::string> zip;
    std::optional<corpus::Source> source;
    std::optional<TimeWindow> window;
};

bool passes_filters(const corpus::Document& doc, const HybridFilters& filters);

struct HybridConfig {
    std::size_t sparse_depth = 50;
    std::size_t dense_depth = 50;
    RrfConfig rrf;
    std::size_t rerank_limit = 20;
    std::size_t top_k = 20;
};

struct HybridProvenance {
    std::size_t candidates_after_filter = 0;
    std::size_t sparse_hits = 0;
    std::size_t dense_hits = 0;
    std::size_t fused = 0;
    std::size_t returned = 0;
    bool sparse_only = false;    // no query vector / no dense index
    bool rerank_fallback = false;
};

struct HybridResult {
    Ranking ranking;
    HybridProvenance provenance;
};

// Metadata filters first, then sparse+dense retrieval, RRF fusion, rerank.
// Without a query vector the result degrades to sparse-only (flagged).
HybridResult hybrid_search(const corpus::DocumentStore& store, const SparseIndex& sparse,
                           const DenseIndex* dense, const std::string& query,
                           const std::optional<std::vector<float>>& query_vec,
                           const HybridFilters& filters, const HybridConfig& cfg,
                           RerankScorer* scorer);

} // namespace floodlens::index
