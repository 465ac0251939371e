#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace floodlens::index {

// Produces the dense query/document vectors. The indices never embed
// anything themselves; callers hand vectors in.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<float> embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Deterministic feature-hashing embedder: each token hashes to one slot with
// a hash-derived sign, then the vector is L2-normalized. No model weights,
// fully reproducible, suitable for offline runs and tests.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 384);
    std::vector<float> embed(const std::string& text) override;
    std::size_t dimension() const override { return dim_; }

private:
    std::size_t dim_;
};

struct EmbedderHttpOptions {
    std::string base_url;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 120;
    std::size_t dimension = 384;
};

// OpenAI-compatible /embeddings endpoint.
std::unique_ptr<Embedder> make_http_embedder(const EmbedderHttpOptions& options);

} // namespace floodlens::index
