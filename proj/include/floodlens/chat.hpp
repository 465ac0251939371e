#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace floodlens::analyst {

struct ChatMessage {
    std::string role;    // "system" | "user" | "assistant"
    std::string content;
    std::vector<std::string> attachments; // opaque image refs (URLs/paths)
};

struct ClientConfig {
    std::string backend = "mock"; // "mock" | "openai"
    std::string base_url;         // e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    double temperature = 0.0;
    int timeout_s = 120;
    int max_attempts = 3;
    int initial_backoff_ms = 500; // doubles per retry
    int requests_per_minute = 0;  // 0 = unlimited
    std::filesystem::path script_path; // mock rules file
};

class ChatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    // Returns the model's raw text. Throws ChatError once retries are spent.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
    virtual std::size_t call_count() const = 0;
};

// Simple token bucket; acquire() blocks until a slot frees up.
class RateLimiter {
public:
    explicit RateLimiter(int requests_per_minute);
    void acquire();

private:
    int rpm_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

// OpenAI-compatible chat completions over HTTP(S), with exponential-backoff
// retries on transport errors, 429 and 5xx.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ClientConfig cfg);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::size_t call_count() const override { return calls_; }

private:
    ClientConfig cfg_;
    RateLimiter limiter_;
    std::size_t calls_ = 0;
};

struct MockRule {
    std::vector<std::string> contains; // every entry must occur in the prompt
    std::string response;
    bool fail = false; // simulate analyst failure
};

// Deterministic offline backend. Resolution order: exact prompt-hash fixture,
// first matching substring rule, default response; otherwise ChatError.
class MockChatClient : public ChatClient {
public:
    MockChatClient() = default;

    static std::uint64_t prompt_key(const std::vector<ChatMessage>& messages);
    void register_fixture(const std::vector<ChatMessage>& messages, std::string response);
    void add_rule(MockRule rule);
    void set_default_response(std::string response);

    static std::unique_ptr<MockChatClient> from_script(const std::filesystem::path& path);

    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::size_t call_count() const override { return calls_; }

private:
    std::vector<std::pair<std::uint64_t, std::string>> fixtures_;
    std::vector<MockRule> rules_;
    std::string default_response_;
    bool has_default_ = false;
    std::size_t calls_ = 0;
    mutable std::mutex mu_;
};

std::unique_ptr<ChatClient> make_client(const ClientConfig& cfg);

} // namespace floodlens::analyst
