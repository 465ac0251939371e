#include "floodlens/corpus.hpp"
#include "floodlens/embedding.hpp"
#include "floodlens/engine.hpp"
#include "floodlens/index.hpp"
#include "floodlens/metrics.hpp"
#include "floodlens/service.hpp"
#include "floodlens/text_utils.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using nlohmann::json;
namespace app = floodlens::app;
namespace corpus = floodlens::corpus;
namespace eval = floodlens::eval;

namespace {

// structured JSONL logs on stderr; stdout stays reserved for results
void log_stderr(const json& event) { std::cerr << event.dump() << "\n"; }

std::unique_ptr<app::Engine> load_engine(const std::string& config_path, bool quiet) {
    auto cfg = app::EngineConfig::load(config_path);
    return app::Engine::load(std::move(cfg), quiet ? app::LogSink{} : log_stderr);
}

corpus::CsvHeaderMap parse_csv_map(const std::string& spec) {
    corpus::CsvHeaderMap map;
    std::string item;
    std::stringstream ss(spec);
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--csv-map expects field=column");
        const std::string field = item.substr(0, eq), column = item.substr(eq + 1);
        if (field == "id") map.id = column;
        else if (field == "text") map.text = column;
        else if (field == "zip") map.zip = column;
        else if (field == "timestamp") map.timestamp = column;
        else if (field == "lat") map.lat = column;
        else if (field == "lon") map.lon = column;
        else throw CLI::ValidationError("unknown csv-map field: " + field);
    }
    return map;
}

int run_ingest(const std::string& config_path, const std::string& raw_path,
               const std::string& format, const std::string& source_name,
               const std::string& csv_map_spec, const std::string& out_path,
               const std::string& emb_path, const std::string& postings_path,
               const std::string& stats_path) {
    auto cfg = app::EngineConfig::load(config_path);
    auto source = corpus::source_from_string(source_name);
    if (!source) {
        std::cerr << "unknown source: " << source_name << "\n";
        return 1;
    }
    const auto fmt = format == "csv" ? corpus::IngestFormat::csv : corpus::IngestFormat::jsonl;
    auto store = corpus::ingest(raw_path, fmt, *source,
                                csv_map_spec.empty() ? corpus::CsvHeaderMap{}
                                                     : parse_csv_map(csv_map_spec));

    corpus::FilterStats stats;
    corpus::DocumentStore kept_store;
    if (*source == corpus::Source::tweet) {
        auto [kept, fstats] = corpus::filter_pipeline(store.docs(), cfg.filter);
        stats = fstats;
        for (auto& doc : kept) kept_store.add(std::move(doc));
    } else {
        for (const auto& doc : store) kept_store.add(doc);
        stats.input_count = stats.kept = store.size();
    }

    corpus::save_jsonl(kept_store, out_path);
    if (!emb_path.empty()) {
        floodlens::index::HashingEmbedder embedder(cfg.clients.embedder_dimension);
        floodlens::index::DenseIndex dense(embedder.dimension());
        for (const auto& doc : kept_store) dense.add(doc.doc_id, embedder.embed(doc.text));
        dense.save_emb1(emb_path);
    }
    if (!postings_path.empty() && !kept_store.empty())
        floodlens::index::SparseIndex::build(kept_store).save_jsonl(postings_path);

    json report{{"input_count", stats.input_count},
                {"retweets_removed", stats.retweets_removed},
                {"blocked", stats.blocked},
                {"no_allow_match", stats.no_allow_match},
                {"spam_removed", stats.spam_removed},
                {"kept", stats.kept},
                {"malformed_skipped", store.skipped()},
                {"out", out_path}};
    if (!stats_path.empty()) {
        std::ofstream out(stats_path);
        out << report.dump(2) << "\n";
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"evidence-synthesis engine for ZIP-level flood impact assessment"};
    cli.require_subcommand(1);

    std::string config_path;
    bool quiet = false;
    cli.add_option("--config", config_path, "engine config JSON")->required();
    cli.add_flag("--quiet", quiet, "suppress stderr logs");

    auto* ingest_cmd = cli.add_subcommand("ingest", "filter raw records and build store snapshots");
    std::string raw_path, format = "jsonl", source_name = "tweet", csv_map_spec;
    std::string out_path = "corpus.jsonl", emb_path, postings_path, stats_path;
    ingest_cmd->add_option("--raw", raw_path, "raw input file")->required();
    ingest_cmd->add_option("--format", format, "jsonl|csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    ingest_cmd->add_option("--source", source_name, "tweet|call_311|caption|sensor_note");
    ingest_cmd->add_option("--csv-map", csv_map_spec, "field=column[,field=column...]");
    ingest_cmd->add_option("--out", out_path, "filtered corpus JSONL");
    ingest_cmd->add_option("--emb", emb_path, "write EMB1 embeddings snapshot");
    ingest_cmd->add_option("--postings", postings_path, "write sparse postings dump (JSONL)");
    ingest_cmd->add_option("--stats", stats_path, "write filter stats JSON");

    auto* assess_cmd = cli.add_subcommand("assess", "assess one ZIP/time-window query");
    std::string zip, start, end, mode = "multimodal";
    bool no_cache = false;
    assess_cmd->add_option("--zip", zip, "5-digit ZIP")->required();
    assess_cmd->add_option("--start", start, "window start (YYYY-MM-DD)");
    assess_cmd->add_option("--end", end, "window end (YYYY-MM-DD)");
    assess_cmd->add_option("--mode", mode, "text_only|text_caption|multimodal")
        ->check(CLI::IsMember({"text_only", "text_caption", "multimodal"}));
    assess_cmd->add_flag("--no-cache", no_cache, "bypass the response cache");

    auto* eval_cmd = cli.add_subcommand("eval", "run the ablation table over a query file");
    std::string queries_path, out_csv, out_json, out_geojson, configs_spec =
        "text_only,text_caption,multimodal";
    eval_cmd->add_option("--queries", queries_path, "queries JSONL (zip, start, end)")->required();
    eval_cmd->add_option("--configs", configs_spec, "comma-separated config labels");
    eval_cmd->add_option("--out-csv", out_csv, "write metric table CSV");
    eval_cmd->add_option("--out-json", out_json, "write summary JSON");
    eval_cmd->add_option("--geojson", out_geojson, "write predictions GeoJSON (multimodal)");

    auto* serve_cmd = cli.add_subcommand("serve", "run the HTTP service");
    std::string host = "0.0.0.0";
    int port = 8080;
    serve_cmd->add_option("--host", host, "bind address");
    serve_cmd->add_option("--port", port, "bind port");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << cli.help();
        return 2;
    }

    try {
        if (*ingest_cmd)
            return run_ingest(config_path, raw_path, format, source_name, csv_map_spec, out_path,
                              emb_path, postings_path, stats_path);

        auto engine = load_engine(config_path, quiet);

        if (*assess_cmd) {
            const auto& fusion_cfg = engine->config().fusion;
            auto s = floodlens::parse_iso8601(start.empty() ? fusion_cfg.default_start : start);
            auto e = floodlens::parse_iso8601(end.empty() ? fusion_cfg.default_end : end);
            if (!s || !e || *e < *s) {
                std::cerr << "bad --start/--end dates\n";
                return 1;
            }
            app::AssessRequest req;
            req.zip = zip;
            req.window = {*s, *e};
            req.mode = *eval::config_label_from_string(mode);
            req.bypass_cache = no_cache;
            std::cout << engine->assess_to_string(req);
            return 0;
        }

        if (*eval_cmd) {
            auto queries = eval::load_queries_jsonl(queries_path);
            std::vector<eval::ConfigLabel> configs;
            std::stringstream ss(configs_spec);
            std::string label;
            while (std::getline(ss, label, ',')) {
                auto parsed = eval::config_label_from_string(label);
                if (!parsed) {
                    std::cerr << "unknown config label: " << label << "\n";
                    return 1;
                }
                configs.push_back(*parsed);
            }
            auto table = engine->run_eval(queries, configs);
            const std::string csv = eval::ablation_to_csv(table);
            std::cout << csv;
            if (!out_csv.empty()) std::ofstream(out_csv) << csv;

            auto audit = engine->audit_retrieval(queries);
            json summary{{"queries", queries.size()},
                         {"skipped", table.skipped},
                         {"retrieval_audit",
                          {{"topic_pct", audit.topic_pct},
                           {"geo_pct", audit.geo_pct},
                           {"avg_per_query", audit.avg_per_query},
                           {"total_retrieved", audit.total}}},
                         {"cells", json::array()}};
            for (const auto& cell : table.cells)
                summary["cells"].push_back(
                    {{"config", std::string(eval::to_string(cell.config))},
                     {"target", cell.target == eval::Target::extent ? "extent" : "damage"},
                     {"mae", cell.metric.mae},
                     {"ci_low", cell.metric.ci_low},
                     {"ci_high", cell.metric.ci_high},
                     {"n", cell.metric.n},
                     {"seed", cell.metric.seed}});
            if (!out_json.empty()) std::ofstream(out_json) << summary.dump(2) << "\n";

            if (!out_geojson.empty()) {
                std::vector<eval::EvalRecord> records;
                auto gt = eval::load_ground_truth_csv(engine->config().paths.ground_truth);
                std::unordered_map<std::string, const eval::GroundTruthRow*> by_zip;
                for (const auto& row : gt) by_zip[row.zip] = &row;
                for (const auto& q : queries) {
                    app::AssessRequest req{q.zip, q.window, eval::ConfigLabel::multimodal, true};
                    try {
                        auto r = engine->assess(req);
                        if (!r.contains("estimates")) continue;
                        eval::EvalRecord rec;
                        rec.zip = q.zip;
                        rec.predicted_extent = r["estimates"]["flood_extent_pct"].get<double>();
                        rec.predicted_damage = r["estimates"]["damage_severity_pct"].get<double>();
                        rec.config_label = eval::ConfigLabel::multimodal;
                        if (auto it = by_zip.find(q.zip); it != by_zip.end()) {
                            rec.gt_extent = it->second->flooded_pct;
                            if (it->second->mean_pde) rec.gt_damage = *it->second->mean_pde * 100.0;
                        }
                        records.push_back(std::move(rec));
                    } catch (const std::exception&) {
                        // skipped rows are already counted in the table
                    }
                }
                std::ofstream(out_geojson)
                    << eval::predictions_to_geojson(records, engine->regions()) << "\n";
            }
            return 0;
        }

        if (*serve_cmd) {
            app::Service service;
            service.attach_engine(std::shared_ptr<app::Engine>(std::move(engine)));
            const int actual = service.start(host, port);
            std::cerr << json{{"event", "serving"}, {"host", host}, {"port", actual}}.dump()
                      << "\n";
            // foreground until interrupted
            static app::Service* active = &service;
            std::signal(SIGINT, [](int) { active->stop(); });
            std::signal(SIGTERM, [](int) { active->stop(); });
            while (service.running()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << cli.help();
    return 2;
}
