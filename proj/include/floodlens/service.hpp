#pragma once

#include "floodlens/engine.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace floodlens::app {

// JSON-over-HTTP front end. POST /assess, POST /chat, GET /healthz.
// Returns 503 until an engine is attached, 400 on validation errors,
// 404 for unknown ZIPs, 502 when the analyst gives up.
class Service {
public:
    Service();
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void attach_engine(std::shared_ptr<Engine> engine);
    bool loaded() const { return static_cast<bool>(engine_); }
    bool running() const { return running_; }

    // Binds and serves on a background thread. port 0 picks a free port;
    // the chosen port is returned.
    int start(const std::string& host, int port);
    void stop();

private:
    void register_routes();

    std::shared_ptr<Engine> engine_;
    std::unique_ptr<httplib::Server> server_;
    std::thread worker_;
    std::atomic<bool> running_{false};
};

} // namespace floodlens::app
