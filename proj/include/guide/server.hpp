#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "guide/session.hpp"

namespace guide::server {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double tick_hz = 2.0;
  session::SessionOptions session;
  std::filesystem::path log_dir;  // finished and aborted trial logs land here when set
};

/// WebSocket front end. Each connection gets its own thread and Session; frames for a session
/// are produced and written in one event order.
class Server {
 public:
  Server(const sim::Environment& env, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting in the background.
  void start();
  /// Bound port, valid after start().
  unsigned short port() const;
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace guide::server
