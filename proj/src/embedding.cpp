#include "floodlens/embedding.hpp"

#include "floodlens/http_support.hpp"
#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace floodlens::index {

using nlohmann::json;

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw std::invalid_argument("dimension must be positive");
}

std::vector<float> HashingEmbedder::embed(const std::string& text) {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : tokenize(text)) {
        const std::uint64_t h = fnv1a64(tok);
        const std::size_t slot = static_cast<std::size_t>(h % dim_);
        acc[slot] += (h & (1ull << 32)) ? 1.0 : -1.0;
    }
    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    std::vector<float> out(dim_, 0.0f);
    if (norm_sq == 0.0) {
        out[0] = 1.0f; // tokenless text still gets a stable unit vector
        return out;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] * inv);
    return out;
}

namespace {

class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(EmbedderHttpOptions opt) : opt_(std::move(opt)) {
        if (opt_.base_url.empty()) throw std::invalid_argument("embedder base_url required");
    }

    std::vector<float> embed(const std::string& text) override {
        json body{{"model", opt_.model}, {"input", text}};
        httplib::Headers headers;
        if (const char* key = std::getenv(opt_.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

        auto [host, path_prefix] = split_base_url(opt_.base_url);
        httplib::Client cli(host);
        cli.set_connection_timeout(opt_.timeout_s, 0);
        cli.set_read_timeout(opt_.timeout_s, 0);
        auto res = cli.Post(path_prefix + "/embeddings", headers, body.dump(), "application/json");
        if (!res) throw std::runtime_error("embedding request failed: no response");
        if (res->status / 100 != 2)
            throw std::runtime_error("embedding request failed: HTTP " +
                                     std::to_string(res->status));
        json j = json::parse(res->body);
        const auto& arr = j.at("data").at(0).at("embedding");
        std::vector<float> out;
        out.reserve(arr.size());
        for (const auto& v : arr) out.push_back(v.get<float>());
        if (out.size() != opt_.dimension)
            throw std::runtime_error("embedding dimension mismatch: got " +
                                     std::to_string(out.size()));
        return out;
    }

    std::size_t dimension() const override { return opt_.dimension; }

private:
    EmbedderHttpOptions opt_;
};

} // namespace

std::unique_ptr<Embedder> make_http_embedder(const EmbedderHttpOptions& options) {
    return std::make_unique<HttpEmbedder>(options);
}

} // namespace floodlens::index
