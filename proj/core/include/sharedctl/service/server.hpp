#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "sharedctl/session.hpp"

namespace sharedctl::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks an ephemeral port
  std::filesystem::path scenario_dir;
  std::filesystem::path static_dir;  // empty: no static files
  std::filesystem::path log_dir;     // empty: finished episodes are kept in memory only
  double tick_rate_hz = 20.0;
  SessionConfig session;  // defaults for new sessions; query parameters override
};

/// HTTP + WebSocket host for live sessions.
///
///   GET /api/scenarios         scenario summaries
///   GET /api/scenarios/{id}    one scenario
///   GET /api/logs              finished episode summaries
///   GET /api/logs/{id}         one episode log (array of log lines)
///   GET /ws?scenario=&condition=&alpha=   WebSocket upgrade, one Session per connection
///   GET /<path>                static file under static_dir
///
/// All I/O runs on one thread, so sessions and the log store need no locking.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts serving on a background thread. Throws ConfigError when
  /// the address cannot be bound.
  void start();
  /// Closes every connection and joins the I/O thread. Idempotent.
  void stop();
  /// Serves on the calling thread until stop() is called from elsewhere.
  void run();

  /// The bound port (valid after start() or once run() has bound).
  std::uint16_t port() const;

  struct Impl;  // defined in server.cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace sharedctl::service
