#pragma once

// WebSocket transport around a Session. One io_context thread runs every
// handler, so the session has exactly one writer.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "mirroreyes/session.hpp"

namespace mirroreyes {

struct ServerOptions {
  std::string address = "127.0.0.1";
  /// 0 picks a free port; see SessionServer::port().
  std::uint16_t port = 0;
  SessionOptions session;
  /// Trial log path; empty disables logging.
  std::filesystem::path log_path;
  /// Connections whose send queue grows past this are closed.
  std::size_t max_queue = 1024;
};

namespace detail {
class Connection;
}

class SessionServer {
public:
  SessionServer(SessionConfig config, ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Bound port, valid right after construction.
  std::uint16_t port() const;

  /// Serves until stop() or SIGINT/SIGTERM when `handle_signals` is set.
  void run(bool handle_signals = false);
  /// Thread-safe.
  void stop();

private:
  friend class detail::Connection;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mirroreyes
