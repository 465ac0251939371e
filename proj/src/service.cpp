#include "floodlens/service.hpp"

#include "floodlens/http_support.hpp"

#include <nlohmann/json.hpp>

namespace floodlens::app {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, json{{"error", message}});
}

} // namespace

Service::Service() : server_(std::make_unique<httplib::Server>()) { register_routes(); }

Service::~Service() { stop(); }

void Service::attach_engine(std::shared_ptr<Engine> engine) { engine_ = std::move(engine); }

void Service::register_routes() {
    server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        if (!loaded()) {
            reply_json(res, 503, json{{"status", "loading"}, {"loaded", false}});
            return;
        }
        reply_json(res, 200,
                   json{{"status", "ok"},
                        {"loaded", true},
                        {"documents", engine_->store().size()},
                        {"zips", engine_->regions().size()}});
    });

    server_->Post("/assess", [this](const httplib::Request& req, httplib::Response& res) {
        if (!loaded()) {
            reply_error(res, 503, "engine not loaded");
            return;
        }
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            reply_error(res, 400, "body must be a JSON object");
            return;
        }
        if (!body.contains("zip") || !body["zip"].is_string()) {
            reply_error(res, 400, "missing field: zip");
            return;
        }
        AssessRequest areq;
        areq.zip = body["zip"].get<std::string>();
        if (!corpus::is_valid_zip(areq.zip)) {
            reply_error(res, 400, "zip must be exactly five digits");
            return;
        }
        const auto& fusion_cfg = engine_->config().fusion;
        auto start = parse_iso8601(body.value("start", fusion_cfg.default_start));
        auto end = parse_iso8601(body.value("end", fusion_cfg.default_end));
        if (!start || !end || *end < *start) {
            reply_error(res, 400, "bad start/end dates");
            return;
        }
        areq.window = {*start, *end};
        auto mode = eval::config_label_from_string(body.value("mode", "multimodal"));
        if (!mode) {
            reply_error(res, 400, "mode must be text_only, text_caption or multimodal");
            return;
        }
        areq.mode = *mode;
        areq.bypass_cache = body.value("bypass_cache", false);
        try {
            res.status = 200;
            res.set_content(engine_->assess(areq).dump(2) + "\n", "application/json");
        } catch (const UnknownZipError& e) {
            reply_error(res, 404, e.what());
        } catch (const AnalystFailure& e) {
            reply_error(res, 502, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    });

    server_->Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
        if (!loaded()) {
            reply_error(res, 503, "engine not loaded");
            return;
        }
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("message") || !body["message"].is_string()) {
            reply_error(res, 400, "missing field: message");
            return;
        }
        auto* parser = engine_->parser_client() ? engine_->parser_client()
                                                : engine_->text_client();
        auto parsed = analyst::parse_user_query(body["message"].get<std::string>(), *parser,
                                                engine_->prompts());
        if (parsed.parse_failed || !parsed.zip) {
            reply_json(res, 400,
                       json{{"error", "could not extract a ZIP code from the message"},
                            {"diagnostic", parsed.diagnostic}});
            return;
        }
        const auto& fusion_cfg = engine_->config().fusion;
        AssessRequest areq;
        areq.zip = *parsed.zip;
        areq.window = {parsed.start ? *parsed.start : *parse_iso8601(fusion_cfg.default_start),
                       parsed.end ? *parsed.end : *parse_iso8601(fusion_cfg.default_end)};
        auto mode = eval::config_label_from_string(body.value("mode", "multimodal"));
        areq.mode = mode ? *mode : eval::ConfigLabel::multimodal;
        try {
            ordered_json out = engine_->assess(areq);
            out["parsed_query"] = {{"zip", *parsed.zip},
                                   {"start", format_compact(areq.window.start)},
                                   {"end", format_compact(areq.window.end)}};
            res.status = 200;
            res.set_content(out.dump(2) + "\n", "application/json");
        } catch (const UnknownZipError& e) {
            reply_error(res, 404, e.what());
        } catch (const AnalystFailure& e) {
            reply_error(res, 502, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    });
}

int Service::start(const std::string& host, int port) {
    int actual = port;
    if (port == 0) {
        actual = server_->bind_to_any_port(host);
        if (actual <= 0) throw std::runtime_error("could not bind service port");
    } else if (!server_->bind_to_port(host, port)) {
        throw std::runtime_error("could not bind port " + std::to_string(port));
    }
    running_ = true;
    worker_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return actual;
}

void Service::stop() {
    if (running_.exchange(false)) {
        server_->stop();
        if (worker_.joinable()) worker_.join();
    }
}

} // namespace floodlens::app
