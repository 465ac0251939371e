#include "floodlens/engine.hpp"

#include "floodlens/csv.hpp"
#include "floodlens/http_support.hpp"
#include "floodlens/text_utils.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace floodlens::app {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

analyst::ClientConfig client_from_json(const json& j, const std::filesystem::path& base) {
    analyst::ClientConfig cfg;
    cfg.backend = j.value("backend", cfg.backend);
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.model = j.value("model", cfg.model);
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
    cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
    cfg.initial_backoff_ms = j.value("initial_backoff_ms", cfg.initial_backoff_ms);
    cfg.requests_per_minute = j.value("requests_per_minute", cfg.requests_per_minute);
    if (j.contains("script")) cfg.script_path = resolve(base, j["script"].get<std::string>());
    return cfg;
}

void require_exists(const std::filesystem::path& p, const char* what) {
    if (p.empty()) return;
    if (!std::filesystem::exists(p))
        throw std::runtime_error(std::string(what) + " path does not exist: " + p.string());
}

} // namespace

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
    const std::string bytes = read_file(path.string());
    json j = json::parse(bytes);
    const auto base = std::filesystem::absolute(path).parent_path();

    EngineConfig cfg;
    cfg.config_hash = fnv1a64(bytes);

    const json paths = j.value("paths", json::object());
    cfg.paths.tweets = resolve(base, paths.value("tweets", ""));
    cfg.paths.calls_311 = resolve(base, paths.value("calls_311", ""));
    cfg.paths.captions = resolve(base, paths.value("captions", ""));
    cfg.paths.tiles = resolve(base, paths.value("tiles", ""));
    cfg.paths.sensors = resolve(base, paths.value("sensors", ""));
    cfg.paths.zips = resolve(base, paths.value("zips", ""));
    cfg.paths.ground_truth = resolve(base, paths.value("ground_truth", ""));
    cfg.paths.embeddings = resolve(base, paths.value("embeddings", ""));
    cfg.paths.fema_priors = resolve(base, paths.value("fema_priors", ""));
    cfg.paths.prompts_dir = resolve(base, paths.value("prompts_dir", "prompts"));

    if (cfg.paths.tweets.empty() || cfg.paths.zips.empty())
        throw std::runtime_error("config must set paths.tweets and paths.zips");
    require_exists(cfg.paths.tweets, "tweets");
    require_exists(cfg.paths.calls_311, "calls_311");
    require_exists(cfg.paths.captions, "captions");
    require_exists(cfg.paths.tiles, "tiles");
    require_exists(cfg.paths.sensors, "sensors");
    require_exists(cfg.paths.zips, "zips");
    require_exists(cfg.paths.ground_truth, "ground_truth");
    require_exists(cfg.paths.embeddings, "embeddings");
    require_exists(cfg.paths.fema_priors, "fema_priors");
    require_exists(cfg.paths.prompts_dir, "prompts_dir");

    if (j.contains("retrieval")) {
        const json& r = j["retrieval"];
        cfg.retrieval.tweet_cap = r.value("tweet_cap", cfg.retrieval.tweet_cap);
        cfg.retrieval.call_cap = r.value("call_cap", cfg.retrieval.call_cap);
        cfg.retrieval.caption_cap = r.value("caption_cap", cfg.retrieval.caption_cap);
        cfg.retrieval.sparse_depth = r.value("sparse_depth", cfg.retrieval.sparse_depth);
        cfg.retrieval.dense_depth = r.value("dense_depth", cfg.retrieval.dense_depth);
        cfg.retrieval.rrf_k = r.value("rrf_k", cfg.retrieval.rrf_k);
        cfg.retrieval.rerank_limit = r.value("rerank_limit", cfg.retrieval.rerank_limit);
        cfg.retrieval.radius_km = r.value("radius_km", cfg.retrieval.radius_km);
        cfg.retrieval.min_tiles = r.value("min_tiles", cfg.retrieval.min_tiles);
        cfg.retrieval.extra_query_terms =
            r.value("extra_query_terms", cfg.retrieval.extra_query_terms);
    }
    if (cfg.retrieval.rrf_k < 1 || cfg.retrieval.radius_km <= 0.0 || cfg.retrieval.min_tiles < 1)
        throw std::runtime_error("retrieval params out of range");

    if (j.contains("fusion")) {
        const json& f = j["fusion"];
        cfg.fusion.peak_date = f.value("peak_date", cfg.fusion.peak_date);
        cfg.fusion.extent_weight = f.value("extent_weight", cfg.fusion.extent_weight);
        cfg.fusion.default_start = f.value("default_start", cfg.fusion.default_start);
        cfg.fusion.default_end = f.value("default_end", cfg.fusion.default_end);
    }
    if (cfg.fusion.extent_weight < 0.0 || cfg.fusion.extent_weight > 1.0)
        throw std::runtime_error("fusion.extent_weight must lie in [0,1]");
    if (!parse_iso8601(cfg.fusion.peak_date)) throw std::runtime_error("bad fusion.peak_date");

    if (j.contains("filter")) {
        const json& f = j["filter"];
        if (f.contains("allow_keywords")) {
            cfg.filter.allow_keywords.clear();
            for (const auto& k : f["allow_keywords"])
                cfg.filter.allow_keywords.insert(k.get<std::string>());
        }
        if (f.contains("block_keywords")) {
            cfg.filter.block_keywords.clear();
            for (const auto& k : f["block_keywords"])
                cfg.filter.block_keywords.insert(k.get<std::string>());
        }
        cfg.filter.max_hashtags = f.value("max_hashtags", cfg.filter.max_hashtags);
        cfg.filter.max_urls = f.value("max_urls", cfg.filter.max_urls);
    }
    cfg.filter.validate();

    if (j.contains("clients")) {
        const json& c = j["clients"];
        if (c.contains("text_analyst"))
            cfg.clients.text_analyst = client_from_json(c["text_analyst"], base);
        if (c.contains("visual_analyst"))
            cfg.clients.visual_analyst = client_from_json(c["visual_analyst"], base);
        if (c.contains("query_parser"))
            cfg.clients.query_parser = client_from_json(c["query_parser"], base);
        else
            cfg.clients.query_parser.backend.clear(); // fall back to the text analyst
        if (c.contains("reranker")) {
            cfg.clients.reranker_backend = c["reranker"].value("backend", "identity");
            cfg.clients.reranker_base_url = c["reranker"].value("base_url", "");
        }
        if (c.contains("embedder")) {
            cfg.clients.embedder_backend = c["embedder"].value("backend", "mock");
            cfg.clients.embedder_base_url = c["embedder"].value("base_url", "");
            cfg.clients.embedder_model = c["embedder"].value("model", "");
            cfg.clients.embedder_dimension =
                c["embedder"].value("dimension", cfg.clients.embedder_dimension);
        }
    } else {
        cfg.clients.query_parser.backend.clear();
    }

    if (j.contains("eval")) {
        const json& e = j["eval"];
        cfg.eval.seed = e.value("seed", cfg.eval.seed);
        cfg.eval.resamples = e.value("resamples", cfg.eval.resamples);
        cfg.eval.parallelism = e.value("parallelism", cfg.eval.parallelism);
        if (e.contains("gazetteer"))
            for (const auto& g : e["gazetteer"]) cfg.eval.gazetteer.push_back(g);
    }
    if (j.contains("cache")) cfg.cache.enabled = j["cache"].value("enabled", false);
    return cfg;
}

namespace {

class HttpRerankScorer : public index::RerankScorer {
public:
    HttpRerankScorer(std::string base_url, int timeout_s)
        : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& texts) override {
        json body{{"query", query}, {"documents", texts}};
        auto [host, prefix] = split_base_url(base_url_);
        httplib::Client cli(host);
        cli.set_connection_timeout(timeout_s_, 0);
        cli.set_read_timeout(timeout_s_, 0);
        auto res = cli.Post(prefix + "/rerank", body.dump(), "application/json");
        if (!res || res->status / 100 != 2) throw std::runtime_error("rerank request failed");
        json j = json::parse(res->body);
        std::vector<double> scores;
        for (const auto& s : j.at("scores")) scores.push_back(s.get<double>());
        return scores;
    }

private:
    std::string base_url_;
    int timeout_s_;
};

} // namespace

std::unique_ptr<index::RerankScorer> make_http_reranker(const std::string& base_url,
                                                        int timeout_s) {
    return std::make_unique<HttpRerankScorer>(base_url, timeout_s);
}

std::unique_ptr<Engine> Engine::load(EngineConfig cfg, LogSink log) {
    auto engine = std::unique_ptr<Engine>(new Engine());
    engine->cfg_ = std::move(cfg);
    engine->log_ = std::move(log);
    const auto& c = engine->cfg_;

    const auto t0 = std::chrono::steady_clock::now();
    corpus::append_store(engine->store_, c.paths.tweets, corpus::IngestFormat::jsonl,
                         corpus::Source::tweet);
    if (!c.paths.calls_311.empty())
        corpus::append_store(engine->store_, c.paths.calls_311, corpus::IngestFormat::jsonl,
                             corpus::Source::call_311);
    if (!c.paths.captions.empty())
        corpus::append_store(engine->store_, c.paths.captions, corpus::IngestFormat::jsonl,
                             corpus::Source::caption);
    if (engine->store_.empty()) throw std::runtime_error("document store is empty after load");

    engine->sparse_ = index::SparseIndex::build(engine->store_);

    if (c.clients.embedder_backend == "mock") {
        engine->embedder_ = std::make_unique<index::HashingEmbedder>(c.clients.embedder_dimension);
    } else if (c.clients.embedder_backend == "openai") {
        index::EmbedderHttpOptions opt;
        opt.base_url = c.clients.embedder_base_url;
        opt.model = c.clients.embedder_model;
        opt.dimension = c.clients.embedder_dimension;
        engine->embedder_ = index::make_http_embedder(opt);
    }

    if (!c.paths.embeddings.empty()) {
        engine->dense_ = index::DenseIndex::load_emb1(c.paths.embeddings);
    } else if (engine->embedder_) {
        index::DenseIndex dense(engine->embedder_->dimension());
        for (const auto& doc : engine->store_)
            dense.add(doc.doc_id, engine->embedder_->embed(doc.text));
        engine->dense_ = std::move(dense);
    }

    if (c.clients.reranker_backend == "identity")
        engine->reranker_ = std::make_unique<index::IdentityRerankScorer>();
    else if (c.clients.reranker_backend == "http")
        engine->reranker_ = make_http_reranker(c.clients.reranker_base_url);
    else if (c.clients.reranker_backend != "none")
        throw std::runtime_error("unknown reranker backend: " + c.clients.reranker_backend);

    engine->regions_ = geo::load_zip_regions_geojson(c.paths.zips);
    for (std::size_t i = 0; i < engine->regions_.size(); ++i)
        engine->region_by_zip_[engine->regions_[i].zip] = i;
    if (!c.paths.sensors.empty()) engine->sensors_ = geo::load_sensors_csv(c.paths.sensors);
    if (!c.paths.tiles.empty()) engine->tiles_ = geo::load_tiles_jsonl(c.paths.tiles);

    if (!c.paths.fema_priors.empty()) {
        auto rows = parse_csv(read_file(c.paths.fema_priors.string()));
        for (std::size_t r = 1; r < rows.size(); ++r)
            if (rows[r].size() >= 2) engine->fema_priors_[rows[r][0]] = rows[r][1];
    }

    engine->prompts_ = analyst::PromptLibrary::load(c.paths.prompts_dir);
    engine->text_client_ = analyst::make_client(c.clients.text_analyst);
    engine->visual_client_ = analyst::make_client(c.clients.visual_analyst);
    if (!c.clients.query_parser.backend.empty())
        engine->parser_client_ = analyst::make_client(c.clients.query_parser);

    if (engine->log_) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        engine->log_({{"event", "engine_loaded"},
                      {"docs", engine->store_.size()},
                      {"skipped", engine->store_.skipped()},
                      {"zips", engine->regions_.size()},
                      {"sensors", engine->sensors_.size()},
                      {"tiles", engine->tiles_.size()},
                      {"dense", engine->dense_ ? engine->dense_->size() : 0},
                      {"ms", ms}});
    }
    return engine;
}

const geo::ZipRegion* Engine::find_region(const std::string& zip) const {
    auto it = region_by_zip_.find(zip);
    return it == region_by_zip_.end() ? nullptr : &regions_[it->second];
}

std::optional<std::vector<float>> Engine::query_vector(const std::string& query) const {
    if (!dense_ || !embedder_ || embedder_->dimension() != dense_->dimension())
        return std::nullopt;
    return embedder_->embed(query);
}

analyst::EvidenceBundle Engine::build_bundle(const std::string& zip, TimeWindow window,
                                             eval::ConfigLabel mode,
                                             index::HybridProvenance* tweet_prov,
                                             index::HybridProvenance* call_prov,
                                             bool* tile_fallback) {
    const auto* region = find_region(zip);
    if (!region) throw UnknownZipError("unknown zip: " + zip);

    analyst::EvidenceBundle bundle;
    bundle.zip = zip;
    bundle.window = window;

    const std::string query = zip + " " + cfg_.retrieval.extra_query_terms;
    const auto qvec = query_vector(query);
    index::HybridConfig hcfg;
    hcfg.sparse_depth = cfg_.retrieval.sparse_depth;
    hcfg.dense_depth = cfg_.retrieval.dense_depth;
    hcfg.rrf.k = cfg_.retrieval.rrf_k;
    hcfg.rerank_limit = cfg_.retrieval.rerank_limit;

    hcfg.top_k = cfg_.retrieval.tweet_cap;
    index::HybridFilters tweet_filters;
    tweet_filters.source = corpus::Source::tweet;
    tweet_filters.window = window;
    auto tweets = index::hybrid_search(store_, *sparse_, dense_ ? &*dense_ : nullptr, query, qvec,
                                       tweet_filters, hcfg, reranker_.get());
    if (tweet_prov) *tweet_prov = tweets.provenance;
    for (const auto& sd : tweets.ranking)
        bundle.tweets.emplace_back(sd.doc_id, store_.find(sd.doc_id)->text);

    hcfg.top_k = cfg_.retrieval.call_cap;
    index::HybridFilters call_filters;
    call_filters.source = corpus::Source::call_311;
    call_filters.zip = zip;
    call_filters.window = window;
    auto calls = index::hybrid_search(store_, *sparse_, dense_ ? &*dense_ : nullptr, query, qvec,
                                      call_filters, hcfg, reranker_.get());
    if (call_prov) *call_prov = calls.provenance;
    for (const auto& sd : calls.ranking)
        bundle.calls_311.emplace_back(sd.doc_id, store_.find(sd.doc_id)->text);

    if (mode != eval::ConfigLabel::text_only && !tiles_.empty()) {
        auto tq = geo::tiles_for_query(*region, window, tiles_, cfg_.retrieval.radius_km,
                                       cfg_.retrieval.min_tiles);
        if (tile_fallback) *tile_fallback = tq.fallback_used;
        for (const auto& tile : tq.tiles) {
            if (bundle.tiles.size() >= cfg_.retrieval.caption_cap) break;
            bundle.tiles.push_back(tile.tile_id);
            if (tile.caption_doc_id) {
                if (const auto* doc = store_.find(*tile.caption_doc_id))
                    bundle.captions.emplace_back(tile.tile_id, doc->text);
            }
        }
    }

    if (!sensors_.empty()) {
        const auto& sensor = geo::nearest_sensor(*region, sensors_);
        bundle.sensor_id = sensor.sensor_id;
        for (const auto& reading : sensor.readings)
            if (window.contains(reading.hour)) bundle.sensor_rows.push_back(reading);
        if (bundle.sensor_rows.empty() && !sensor.readings.empty()) {
            // nothing in-window: surface the temporally closest reading
            const geo::SensorReading* best = &sensor.readings.front();
            for (const auto& reading : sensor.readings)
                if (window.distance_secs(reading.hour) < window.distance_secs(best->hour))
                    best = &reading;
            bundle.sensor_rows.push_back(*best);
        }
    }

    if (auto it = fema_priors_.find(zip); it != fema_priors_.end()) {
        bundle.fema_prior = it->second;
        bundle.fema_ref = "fema:" + zip;
    }
    return bundle;
}

nlohmann::ordered_json Engine::assess(const AssessRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string mode_name(eval::to_string(req.mode));
    const std::string cache_key = req.zip + "|" + format_iso8601(req.window.start) + "|" +
                                  format_iso8601(req.window.end) + "|" + mode_name + "|" +
                                  std::to_string(cfg_.config_hash);
    if (cfg_.cache.enabled && !req.bypass_cache) {
        std::lock_guard lock(cache_mu_);
        if (auto it = cache_.find(cache_key); it != cache_.end()) {
            if (log_) log_({{"event", "assess_cache_hit"}, {"zip", req.zip}});
            return ordered_json::parse(it->second);
        }
    }

    index::HybridProvenance tweet_prov, call_prov;
    bool tile_fallback = false;
    auto bundle = build_bundle(req.zip, req.window, req.mode, &tweet_prov, &call_prov,
                               &tile_fallback);

    ordered_json response;
    if (bundle.empty_evidence()) {
        response["zip"] = req.zip;
        response["time_window"] = {{"start", format_compact(req.window.start)},
                                   {"end", format_compact(req.window.end)}};
        response["insufficient_evidence"] = true;
        response["message"] = "no evidence of any kind was retrieved for this query";
        return response;
    }

    const std::int64_t query_day = day_of(req.window.end);
    const std::int64_t peak_day = day_of(*parse_iso8601(cfg_.fusion.peak_date));
    const bool after_peak = query_day > peak_day;

    const auto mode_prompt = req.mode == eval::ConfigLabel::text_only
                                 ? analyst::PromptMode::text_only
                                 : analyst::PromptMode::multimodal;
    const std::string user_prompt = prompts_.user_prompt(bundle);

    std::string text_raw;
    try {
        text_raw = text_client_->complete(
            {{"system", prompts_.system_prompt(mode_prompt), {}}, {"user", user_prompt, {}}});
    } catch (const std::exception& e) {
        throw AnalystFailure(std::string("text analyst failed: ") + e.what());
    }
    analyst::AnalystReport text_report;
    try {
        text_report = analyst::parse_report(text_raw, after_peak);
    } catch (const analyst::ReportParseError& e) {
        throw AnalystFailure(std::string("text analyst returned unusable output: ") + e.what());
    }
    analyst::sanitize_evidence_refs(text_report, bundle);

    std::optional<analyst::AnalystReport> visual_report;
    std::string visual_error;
    if (req.mode == eval::ConfigLabel::multimodal && !bundle.tiles.empty()) {
        try {
            analyst::ChatMessage user{"user", prompts_.visual_user_prompt(bundle), {}};
            for (const auto& tile_id : bundle.tiles)
                user.attachments.push_back("tile://" + tile_id);
            const std::string visual_raw = visual_client_->complete(
                {{"system", prompts_.system_prompt(analyst::PromptMode::multimodal), {}}, user});
            visual_report = analyst::parse_report(visual_raw, after_peak);
            analyst::sanitize_evidence_refs(*visual_report, bundle);
        } catch (const std::exception& e) {
            // visual analysis unavailable: degrade to the text-only branch
            visual_error = e.what();
            visual_report.reset();
        }
    }

    fusion::FusionInput fin;
    fin.text_report = text_report;
    fin.visual_report = visual_report;
    fin.query_day = query_day;
    fin.peak_day = peak_day;
    fin.extent_weight = cfg_.fusion.extent_weight;
    const auto fused = fusion::fuse(fin);

    std::vector<std::string> roads = text_report.roads_impacted;
    if (visual_report)
        for (const auto& r : visual_report->roads_impacted)
            if (std::find(roads.begin(), roads.end(), r) == roads.end()) roads.push_back(r);

    response["reasoning"] = text_report.reasoning;
    response["zip"] = req.zip;
    response["time_window"] = {{"start", format_compact(req.window.start)},
                               {"end", format_compact(req.window.end)}};
    response["estimates"] = {{"flood_extent_pct", fused.flood_extent_pct},
                             {"damage_severity_pct", fused.damage_severity_pct},
                             {"roads_impacted", roads},
                             {"confidence", fused.confidence}};
    response["evidence_refs"] = {{"imagery_tile_ids", fused.merged_refs.imagery_tile_ids},
                                 {"tweet_ids", fused.merged_refs.tweet_ids},
                                 {"call_311_ids", fused.merged_refs.call_311_ids},
                                 {"sensor_ids", fused.merged_refs.sensor_ids},
                                 {"kb_refs", fused.merged_refs.kb_refs}};
    response["natural_language_summary"] = text_report.natural_language_summary;
    response["branch_taken"] = std::string(fusion::to_string(fused.branch_taken));

    auto report_json = [](const analyst::AnalystReport& r) {
        return ordered_json{{"flood_extent_pct", r.flood_extent_pct},
                            {"damage_severity_pct", r.damage_severity_pct},
                            {"recession_observed", r.recession_observed},
                            {"confidence", r.confidence},
                            {"parse_flags", r.parse_flags}};
    };
    ordered_json prov;
    prov["mode"] = mode_name;
    prov["retrieval"] = {
        {"query", req.zip + " " + cfg_.retrieval.extra_query_terms},
        {"tweets",
         {{"after_filter", tweet_prov.candidates_after_filter},
          {"sparse_hits", tweet_prov.sparse_hits},
          {"dense_hits", tweet_prov.dense_hits},
          {"fused", tweet_prov.fused},
          {"returned", tweet_prov.returned},
          {"sparse_only", tweet_prov.sparse_only},
          {"rerank_fallback", tweet_prov.rerank_fallback}}},
        {"calls_311",
         {{"after_filter", call_prov.candidates_after_filter},
          {"sparse_hits", call_prov.sparse_hits},
          {"dense_hits", call_prov.dense_hits},
          {"fused", call_prov.fused},
          {"returned", call_prov.returned},
          {"sparse_only", call_prov.sparse_only},
          {"rerank_fallback", call_prov.rerank_fallback}}},
        {"tiles", bundle.tiles},
        {"tile_fallback", tile_fallback},
        {"captions", bundle.captions.size()},
        {"sensor_id", bundle.sensor_id}};
    prov["reports"] = {{"text", report_json(text_report)},
                       {"visual", visual_report ? report_json(*visual_report) : ordered_json()}};
    if (!visual_error.empty()) prov["visual_error"] = visual_error;
    prov["fusion"] = {{"query_date", format_date(req.window.end)},
                      {"peak_date", cfg_.fusion.peak_date},
                      {"extent_weight", cfg_.fusion.extent_weight}};
    prov["prompts"] = {
        {"system_checksum", fnv1a64_hex(prompts_.system_prompt(mode_prompt))},
        {"user_checksum", fnv1a64_hex(user_prompt)}};
    prov["config_hash"] = fnv1a64_hex(std::to_string(cfg_.config_hash));
    response["provenance"] = std::move(prov);

    if (cfg_.cache.enabled && !req.bypass_cache) {
        std::lock_guard lock(cache_mu_);
        cache_[cache_key] = response.dump();
    }
    if (log_) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        log_({{"event", "assess"},
              {"zip", req.zip},
              {"mode", mode_name},
              {"tweets", bundle.tweets.size()},
              {"calls", bundle.calls_311.size()},
              {"tiles", bundle.tiles.size()},
              {"branch", std::string(fusion::to_string(fused.branch_taken))},
              {"ms", ms}});
    }
    return response;
}

std::string Engine::assess_to_string(const AssessRequest& req) {
    return assess(req).dump(2) + "\n";
}

eval::AblationTable Engine::run_eval(const std::vector<eval::Query>& queries,
                                     const std::vector<eval::ConfigLabel>& configs) {
    if (cfg_.paths.ground_truth.empty())
        throw std::runtime_error("eval requires paths.ground_truth");
    const auto ground_truth = eval::load_ground_truth_csv(cfg_.paths.ground_truth);
    eval::AssessFn fn = [this](const eval::Query& q,
                               eval::ConfigLabel mode) -> std::optional<eval::Prediction> {
        try {
            AssessRequest req{q.zip, q.window, mode, /*bypass_cache=*/true};
            auto response = assess(req);
            if (!response.contains("estimates")) return std::nullopt;
            return eval::Prediction{response["estimates"]["flood_extent_pct"].get<double>(),
                                    response["estimates"]["damage_severity_pct"].get<double>()};
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    return eval::run_ablation(queries, configs, fn, ground_truth, cfg_.eval.seed,
                              cfg_.eval.resamples, cfg_.eval.parallelism);
}

eval::RetrievalAudit Engine::audit_retrieval(const std::vector<eval::Query>& queries) {
    std::vector<std::vector<std::string>> texts_per_query;
    texts_per_query.reserve(queries.size());
    for (const auto& q : queries) {
        std::vector<std::string> texts;
        try {
            auto bundle = build_bundle(q.zip, q.window, eval::ConfigLabel::text_only);
            for (const auto& [id, text] : bundle.tweets) texts.push_back(text);
        } catch (const UnknownZipError&) {
            // audited as an empty retrieval
        }
        texts_per_query.push_back(std::move(texts));
    }
    return eval::retrieval_quality(texts_per_query, cfg_.filter.allow_keywords,
                                   cfg_.eval.gazetteer);
}

} // namespace floodlens::app
