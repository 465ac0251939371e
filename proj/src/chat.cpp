#include "floodlens/chat.hpp"

#include "floodlens/http_support.hpp"
#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace floodlens::analyst {

using nlohmann::json;

RateLimiter::RateLimiter(int requests_per_minute)
    : rpm_(requests_per_minute), tokens_(requests_per_minute),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rpm_ <= 0) return;
    std::unique_lock lock(mu_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(static_cast<double>(rpm_), tokens_ + elapsed * rpm_ / 60.0);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait_s = (1.0 - tokens_) * 60.0 / rpm_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

HttpChatClient::HttpChatClient(ClientConfig cfg)
    : cfg_(std::move(cfg)), limiter_(cfg_.requests_per_minute) {
    if (cfg_.base_url.empty()) throw std::invalid_argument("chat client base_url required");
}

namespace {

json message_to_wire(const ChatMessage& m) {
    json msg{{"role", m.role}};
    if (m.attachments.empty()) {
        msg["content"] = m.content;
    } else {
        // OpenAI vision-style content parts; attachments ride as image URLs
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", m.content}});
        for (const auto& a : m.attachments)
            parts.push_back({{"type", "image_url"}, {"image_url", {{"url", a}}}});
        msg["content"] = std::move(parts);
    }
    return msg;
}

bool retryable_status(int status) { return status == 429 || status / 100 == 5; }

} // namespace

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    ++calls_;
    json body{{"model", cfg_.model}, {"temperature", cfg_.temperature}};
    auto& arr = body["messages"] = json::array();
    for (const auto& m : messages) arr.push_back(message_to_wire(m));
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto [host, path_prefix] = split_base_url(cfg_.base_url);
    std::string last_error;
    int backoff_ms = cfg_.initial_backoff_ms;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        limiter_.acquire();
        httplib::Client cli(host);
        cli.set_connection_timeout(cfg_.timeout_s, 0);
        cli.set_read_timeout(cfg_.timeout_s, 0);
        cli.set_write_timeout(cfg_.timeout_s, 0);
        auto res = cli.Post(path_prefix + "/chat/completions", headers, payload,
                            "application/json");
        if (res && res->status / 100 == 2) {
            json j = json::parse(res->body, nullptr, false);
            if (!j.is_discarded() && j.contains("choices") && !j["choices"].empty()) {
                const auto& content = j["choices"][0]["message"]["content"];
                if (content.is_string()) return content.get<std::string>();
            }
            throw ChatError("malformed chat completion response");
        }
        if (res && !retryable_status(res->status))
            throw ChatError("chat endpoint returned HTTP " + std::to_string(res->status));
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport error: " + httplib::to_string(res.error());
        if (attempt < cfg_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    throw ChatError("chat request failed after " + std::to_string(cfg_.max_attempts) +
                    " attempts (" + last_error + ")");
}

std::uint64_t MockChatClient::prompt_key(const std::vector<ChatMessage>& messages) {
    std::string joined;
    for (const auto& m : messages) {
        joined += m.role;
        joined += '\n';
        joined += m.content;
        joined += '\n';
        for (const auto& a : m.attachments) {
            joined += a;
            joined += '\n';
        }
    }
    return fnv1a64(joined);
}

void MockChatClient::register_fixture(const std::vector<ChatMessage>& messages,
                                      std::string response) {
    std::lock_guard lock(mu_);
    fixtures_.emplace_back(prompt_key(messages), std::move(response));
}

void MockChatClient::add_rule(MockRule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(rule));
}

void MockChatClient::set_default_response(std::string response) {
    std::lock_guard lock(mu_);
    default_response_ = std::move(response);
    has_default_ = true;
}

std::unique_ptr<MockChatClient> MockChatClient::from_script(const std::filesystem::path& path) {
    auto client = std::make_unique<MockChatClient>();
    json j = json::parse(read_file(path.string()));
    auto response_of = [](const json& entry) -> std::string {
        if (entry.contains("response_json")) return entry["response_json"].dump();
        return entry.value("response", std::string());
    };
    for (const auto& entry : j.value("rules", json::array())) {
        MockRule rule;
        if (entry.contains("contains_all"))
            for (const auto& c : entry["contains_all"]) rule.contains.push_back(c);
        else if (entry.contains("contains"))
            rule.contains.push_back(entry["contains"].get<std::string>());
        rule.fail = entry.value("fail", false);
        rule.response = response_of(entry);
        client->add_rule(std::move(rule));
    }
    if (j.contains("default")) client->set_default_response(response_of(j["default"]));
    return client;
}

std::string MockChatClient::complete(const std::vector<ChatMessage>& messages) {
    std::lock_guard lock(mu_);
    ++calls_;
    const std::uint64_t key = prompt_key(messages);
    for (const auto& [k, response] : fixtures_)
        if (k == key) return response;

    std::string joined;
    for (const auto& m : messages) {
        joined += m.content;
        joined += '\n';
    }
    for (const auto& rule : rules_) {
        const bool matched =
            std::all_of(rule.contains.begin(), rule.contains.end(), [&](const std::string& c) {
                return joined.find(c) != std::string::npos;
            });
        if (matched) {
            if (rule.fail) throw ChatError("mock analyst failure (scripted)");
            return rule.response;
        }
    }
    if (has_default_) return default_response_;
    throw ChatError("mock has no fixture, rule or default for this prompt");
}

std::unique_ptr<ChatClient> make_client(const ClientConfig& cfg) {
    if (cfg.backend == "mock") {
        if (!cfg.script_path.empty()) return MockChatClient::from_script(cfg.script_path);
        return std::make_unique<MockChatClient>();
    }
    if (cfg.backend == "openai") return std::make_unique<HttpChatClient>(cfg);
    throw std::invalid_argument("unknown chat backend: " + cfg.backend);
}

} // namespace floodlens::analyst
