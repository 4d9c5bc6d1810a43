#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ghal/session.hpp"

namespace ghal {

struct ServerOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8360;  // 0 = pick a free port
    /// Idle period after which a cadence tick fires; 0 disables cadence.
    int cadence_ms = 2000;
    SessionConfig session;
    /// When set, each closed session's trace is written here.
    std::filesystem::path trace_dir;
};

/// WebSocket server: one Session per connection on the /session endpoint.
/// Runs on a single thread; sessions are independent.
class SessionServer {
public:
    SessionServer(const World& world, const GuidancePolicy* policy, ServerOptions opts);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    /// Bound port (useful with port 0).
    [[nodiscard]] unsigned short port() const noexcept;
    /// Serves until stop() is called.
    void run();
    /// Thread-safe.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ghal
