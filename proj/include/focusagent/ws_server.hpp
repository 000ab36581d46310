// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "focusagent/live_session.hpp"

namespace focusagent {

struct ServerOptions {
  std::string address = "0.0.0.0";
  // 0 binds an ephemeral port; see WsServer::port().
  unsigned short port = 8080;
  std::chrono::milliseconds tick_interval{100};
  // Transcript written when the session ends or the server stops.
  std::optional<std::filesystem::path> out;
  bool handle_signals = false;
};

// WebSocket front end for one LiveSession. Connections are served on an I/O
// thread; every client frame and timer tick goes through one ordered queue
// consumed by the thread that calls run(), which is the only one touching the
// session. Each connection writes its frames in FIFO order.
class WsServer {
 public:
  // Binds and listens immediately.
  WsServer(LiveSession& session, ServerOptions options);
  ~WsServer();
  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;

  [[nodiscard]] unsigned short port() const;

  // Blocks until the session closes or stop() is called.
  void run();
  // Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace focusagent
