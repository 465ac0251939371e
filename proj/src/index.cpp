#include "floodlens/index.hpp"

#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace floodlens::index {

using nlohmann::json;

void sort_ranking(Ranking& r) {
    std::sort(r.begin(), r.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

SparseIndex SparseIndex::build(const corpus::DocumentStore& store, Bm25Params params) {
    if (store.empty()) throw std::invalid_argument("cannot build sparse index from empty store");
    if (params.k1 <= 0.0 || params.b < 0.0 || params.b > 1.0)
        throw std::invalid_argument("BM25 params out of range");

    SparseIndex idx;
    idx.params_ = params;
    std::uint64_t total_len = 0;
    for (const auto& doc : store) {
        const auto doc_idx = static_cast<std::uint32_t>(idx.doc_ids_.size());
        idx.index_of_.emplace(doc.doc_id, doc_idx);
        idx.doc_ids_.push_back(doc.doc_id);

        auto tokens = tokenize(doc.text);
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_len += tokens.size();

        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokens) ++tf[t];
        for (auto& [term, freq] : tf) idx.postings_[term].emplace_back(doc_idx, freq);
    }
    idx.avg_len_ = static_cast<double>(total_len) / static_cast<double>(idx.doc_ids_.size());
    return idx;
}

std::uint32_t SparseIndex::doc_length(std::string_view doc_id) const {
    auto it = index_of_.find(std::string(doc_id));
    return it == index_of_.end() ? 0 : doc_lengths_[it->second];
}

std::uint32_t SparseIndex::term_frequency(std::string_view term, std::string_view doc_id) const {
    auto pit = postings_.find(std::string(term));
    auto dit = index_of_.find(std::string(doc_id));
    if (pit == postings_.end() || dit == index_of_.end()) return 0;
    for (auto& [d, tf] : pit->second)
        if (d == dit->second) return tf;
    return 0;
}

Ranking SparseIndex::search(std::string_view query, std::size_t top_k,
                            const std::unordered_set<std::string>* restrict_ids) const {
    if (top_k == 0) return {};
    auto qtokens = tokenize(query);
    std::set<std::string> qterms(qtokens.begin(), qtokens.end());

    const double n_docs = static_cast<double>(doc_ids_.size());
    std::unordered_map<std::uint32_t, double> accum;
    for (const auto& term : qterms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        for (auto& [doc_idx, tf] : it->second) {
            const double dl = doc_lengths_[doc_idx];
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * dl / avg_len_);
            accum[doc_idx] += idf * (tf * (params_.k1 + 1.0)) / (tf + norm);
        }
    }

    Ranking out;
    out.reserve(accum.size());
    for (auto& [doc_idx, score] : accum) {
        const auto& id = doc_ids_[doc_idx];
        if (restrict_ids && !restrict_ids->count(id)) continue;
        out.push_back({id, score});
    }
    sort_ranking(out);
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

void SparseIndex::save_jsonl(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    json meta{{"type", "meta"},
              {"doc_count", doc_ids_.size()},
              {"avg_doc_length", avg_len_},
              {"k1", params_.k1},
              {"b", params_.b}};
    out << meta.dump() << '\n';
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        json d{{"type", "doc"}, {"id", doc_ids_[i]}, {"length", doc_lengths_[i]}};
        out << d.dump() << '\n';
    }
    for (const auto& [term, plist] : postings_) {
        json p{{"type", "term"}, {"term", term}};
        auto& arr = p["postings"] = json::array();
        for (auto& [doc_idx, tf] : plist) arr.push_back({doc_ids_[doc_idx], tf});
        out << p.dump() << '\n';
    }
}

SparseIndex SparseIndex::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    SparseIndex idx;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        const std::string type = j.at("type");
        if (type == "meta") {
            idx.avg_len_ = j.at("avg_doc_length");
            idx.params_.k1 = j.at("k1");
            idx.params_.b = j.at("b");
        } else if (type == "doc") {
            std::string id = j.at("id");
            idx.index_of_.emplace(id, static_cast<std::uint32_t>(idx.doc_ids_.size()));
            idx.doc_ids_.push_back(std::move(id));
            idx.doc_lengths_.push_back(j.at("length"));
        } else if (type == "term") {
            auto& plist = idx.postings_[j.at("term")];
            for (auto& rec : j.at("postings")) {
                auto it = idx.index_of_.find(rec.at(0).get<std::string>());
                if (it == idx.index_of_.end())
                    throw std::runtime_error("postings dump references unknown doc");
                plist.emplace_back(it->second, rec.at(1).get<std::uint32_t>());
            }
        }
    }
    if (idx.doc_ids_.empty()) throw std::runtime_error("postings dump holds no documents");
    return idx;
}

DenseIndex::DenseIndex(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw std::invalid_argument("dimension must be positive");
}

void DenseIndex::add(std::string doc_id, std::span<const float> vec) {
    if (vec.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
    if (index_of_.count(doc_id)) throw std::invalid_argument("duplicate doc_id: " + doc_id);
    double norm_sq = 0.0;
    for (float v : vec) norm_sq += static_cast<double>(v) * v;
    if (norm_sq == 0.0) throw std::invalid_argument("zero vector for doc " + doc_id);
    const double inv = 1.0 / std::sqrt(norm_sq);

    index_of_.emplace(doc_id, ids_.size());
    ids_.push_back(std::move(doc_id));
    flat_.reserve(flat_.size() + dim_);
    for (float v : vec) flat_.push_back(static_cast<float>(v * inv));
}

bool DenseIndex::contains(std::string_view doc_id) const {
    return index_of_.count(std::string(doc_id)) != 0;
}

std::span<const float> DenseIndex::vector_of(std::string_view doc_id) const {
    auto it = index_of_.find(std::string(doc_id));
    if (it == index_of_.end()) throw std::out_of_range("unknown doc_id");
    return {flat_.data() + it->second * dim_, dim_};
}

Ranking DenseIndex::search(std::span<const float> query, std::size_t top_k,
                           const std::unordered_set<std::string>* restrict_ids) const {
    if (query.size() != dim_) throw std::invalid_argument("query dimension mismatch");
    if (top_k == 0) return {};
    double qnorm_sq = 0.0;
    for (float v : query) qnorm_sq += static_cast<double>(v) * v;
    const double qinv = qnorm_sq > 0.0 ? 1.0 / std::sqrt(qnorm_sq) : 0.0;

    Ranking out;
    out.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (restrict_ids && !restrict_ids->count(ids_[i])) continue;
        const float* v = flat_.data() + i * dim_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) dot += static_cast<double>(query[d]) * v[d];
        out.push_back({ids_[i], dot * qinv});
    }
    sort_ranking(out);
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated embedding file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void DenseIndex::save_emb1(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("EMB1", 4);
    put_u32(out, static_cast<std::uint32_t>(ids_.size()));
    put_u32(out, static_cast<std::uint32_t>(dim_));
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        put_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
        out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
        // float32 little-endian; this build targets little-endian hosts
        out.write(reinterpret_cast<const char*>(flat_.data() + i * dim_),
                  static_cast<std::streamsize>(dim_ * sizeof(float)));
    }
}

DenseIndex DenseIndex::load_emb1(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EMB1", 4) != 0)
        throw std::runtime_error(path.string() + ": bad embedding file magic");
    const std::uint32_t count = get_u32(in);
    const std::uint32_t dim = get_u32(in);
    if (dim == 0) throw std::runtime_error(path.string() + ": zero dimension");

    DenseIndex idx(dim);
    std::vector<float> vec(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t id_len = get_u32(in);
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        in.read(reinterpret_cast<char*>(vec.data()),
                static_cast<std::streamsize>(dim * sizeof(float)));
        if (!in) throw std::runtime_error("truncated embedding file");
        idx.add(std::move(id), vec);
    }
    return idx;
}

Ranking rrf_fuse(const std::vector<Ranking>& rankings, RrfConfig cfg, std::size_t top_k) {
    if (rankings.empty()) throw std::invalid_argument("rrf_fuse needs at least one ranking");
    if (cfg.k < 1) throw std::invalid_argument("RRF k must be >= 1");
    std::map<std::string, double> accum; // ordered map keeps accumulation deterministic
    for (const auto& ranking : rankings) {
        for (std::size_t pos = 0; pos < ranking.size(); ++pos)
            accum[ranking[pos].doc_id] += 1.0 / (cfg.k + static_cast<double>(pos + 1));
    }
    Ranking out;
    out.reserve(accum.size());
    for (auto& [id, score] : accum) out.push_back({id, score});
    sort_ranking(out);
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

std::vector<double> IdentityRerankScorer::score(const std::string&,
                                                const std::vector<std::string>& texts) {
    std::vector<double> s(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
        s[i] = static_cast<double>(texts.size() - i);
    return s;
}

RerankResult rerank(const std::string& query, const Ranking& candidates,
                    const corpus::DocumentStore& store, RerankScorer& scorer, std::size_t limit) {
    Ranking head(candidates.begin(),
                 candidates.begin() + static_cast<std::ptrdiff_t>(std::min(limit, candidates.size())));
    std::vector<std::string> texts;
    texts.reserve(head.size());
    for (const auto& sd : head) {
        const auto* doc = store.find(sd.doc_id);
        texts.push_back(doc ? doc->text : std::string());
    }
    try {
        auto scores = scorer.score(query, texts);
        if (scores.size() != head.size()) throw std::runtime_error("scorer returned wrong arity");
        for (std::size_t i = 0; i < head.size(); ++i) head[i].score = scores[i];
        sort_ranking(head);
        return {std::move(head), false};
    } catch (const std::exception&) {
        return {std::move(head), true};
    }
}

bool passes_filters(const corpus::Document& doc, const HybridFilters& filters) {
    if (filters.source && doc.source != *filters.source) return false;
    if (filters.zip && (!doc.zip || *doc.zip != *filters.zip)) return false;
    if (filters.window && !filters.window->contains(doc.timestamp)) return false;
    return true;
}

HybridResult hybrid_search(const corpus::DocumentStore& store, const SparseIndex& sparse,
                           const DenseIndex* dense, const std::string& query,
                           const std::optional<std::vector<float>>& query_vec,
                           const HybridFilters& filters, const HybridConfig& cfg,
                           RerankScorer* scorer) {
    HybridResult result;
    auto& prov = result.provenance;

    const bool filtered =
        filters.zip.has_value() || filters.source.has_value() || filters.window.has_value();
    std::unordered_set<std::string> allowed;
    if (filtered) {
        for (const auto& doc : store)
            if (passes_filters(doc, filters)) allowed.insert(doc.doc_id);
        prov.candidates_after_filter = allowed.size();
        if (allowed.empty()) return result;
    } else {
        prov.candidates_after_filter = store.size();
    }
    const auto* restrict_ids = filtered ? &allowed : nullptr;

    Ranking fused;
    if (dense && query_vec) {
        auto sparse_hits = sparse.search(query, cfg.sparse_depth, restrict_ids);
        auto dense_hits = dense->search(*query_vec, cfg.dense_depth, restrict_ids);
        prov.sparse_hits = sparse_hits.size();
        prov.dense_hits = dense_hits.size();
        fused = rrf_fuse({std::move(sparse_hits), std::move(dense_hits)}, cfg.rrf);
    } else {
        prov.sparse_only = true;
        fused = sparse.search(query, std::max(cfg.sparse_depth, cfg.top_k), restrict_ids);
        prov.sparse_hits = fused.size();
    }
    prov.fused = fused.size();

    if (scorer) {
        auto rr = rerank(query, fused, store, *scorer, cfg.rerank_limit);
        prov.rerank_fallback = rr.fallback;
        result.ranking = std::move(rr.ranking);
    } else {
        result.ranking = std::move(fused);
    }
    if (result.ranking.size() > cfg.top_k) result.ranking.resize(cfg.top_k);
    prov.returned = result.ranking.size();
    return result;
}

} // namespace floodlens::index
