// SPDX-License-Identifier: Apache-2.0

#include "focusagent/ws_server.hpp"

#include <condition_variable>
#include <csignal>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "focusagent/error.hpp"
#include "focusagent/transcript_store.hpp"

namespace focusagent {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection;

// Callbacks from connections into the server; all invoked on the I/O thread.
class Hub {
 public:
  virtual ~Hub() = default;
  virtual void opened(const std::shared_ptr<Connection>& c) = 0;
  virtual void received(const std::string& id, std::string frame) = 0;
  virtual void closed(const std::string& id, bool accepted) = 0;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::string id, Hub& hub)
      : ws_(std::move(socket)), id_(std::move(id)), hub_(hub) {}

  const std::string& id() const { return id_; }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->accepted_ = true;
      self->hub_.opened(self);
      self->read();
    });
  }

  void send(std::string frame) {
    outbox_.push_back(std::move(frame));
    if (!writing_) write();
  }

  void close_when_drained() {
    closing_ = true;
    if (!writing_) close();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      self->hub_.received(self->id_, beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void write() {
    if (outbox_.empty()) {
      writing_ = false;
      if (closing_) close();
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->outbox_.pop_front();
                      if (ec) {
                        self->outbox_.clear();
                        self->writing_ = false;
                        return;
                      }
                      self->write();
                    });
  }

  void close() {
    if (close_sent_ || !ws_.is_open()) return;
    close_sent_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    hub_.closed(id_, accepted_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::string id_;
  Hub& hub_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
  bool accepted_ = false;
  bool finished_ = false;
};

}  // namespace

struct WsServer::Impl final : Hub {
  Impl(LiveSession& s, ServerOptions o)
      : session(s), options(std::move(o)), acceptor(ioc), signals(ioc) {
    const tcp::endpoint endpoint(net::ip::make_address(options.address), options.port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen(net::socket_base::max_listen_connections);
  }

  // --- I/O thread ---

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto id = "c" + std::to_string(++next_id);
      std::make_shared<Connection>(std::move(socket), std::move(id), *this)->start();
      accept();
    });
  }

  void opened(const std::shared_ptr<Connection>& c) override { connections[c->id()] = c; }

  void received(const std::string& id, std::string frame) override {
    try {
      enqueue(decode_client_event(frame, id, received_now()));
    } catch (const Error& e) {
      std::cerr << "dropping frame from " << id << ": " << e.what() << "\n";
    }
  }

  void closed(const std::string& id, bool accepted) override {
    connections.erase(id);
    if (accepted) enqueue(ClientEvent::leave(id, received_now()));
  }

  void deliver(const std::vector<std::string>& ids, const std::string& frame) {
    for (const auto& id : ids) {
      if (auto it = connections.find(id); it != connections.end()) it->second->send(frame);
    }
  }

  void shutdown_io() {
    beast::error_code ignored;
    acceptor.close(ignored);
    signals.cancel(ignored);
    if (connections.empty()) return;
    for (auto& [id, c] : connections) c->close_when_drained();
    // Peers that never answer the close handshake must not hold the server.
    auto timer = std::make_shared<net::steady_timer>(ioc, std::chrono::seconds(1));
    timer->async_wait([this, timer](beast::error_code) { ioc.stop(); });
  }

  // --- any thread ---

  Timestamp received_now() const {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  }

  void enqueue(ClientEvent event) {
    {
      const std::lock_guard lock(mutex);
      queue.push_back(std::move(event));
    }
    wake.notify_one();
  }

  void request_stop() {
    {
      const std::lock_guard lock(mutex);
      stopping = true;
    }
    wake.notify_one();
  }

  // --- driver thread ---

  void dispatch(const std::vector<Outbound>& outbound) {
    for (const auto& o : outbound) {
      std::vector<std::string> ids;
      if (o.to) {
        ids.push_back(*o.to);
      } else {
        for (const auto& [client, name] : session.state().roster) ids.push_back(client);
      }
      net::post(ioc, [this, ids = std::move(ids), frame = encode_server_event(o.event)] {
        deliver(ids, frame);
      });
    }
  }

  void drive() {
    while (true) {
      std::deque<ClientEvent> batch;
      {
        std::unique_lock lock(mutex);
        wake.wait_for(lock, options.tick_interval, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        batch.swap(queue);
      }
      try {
        for (const auto& event : batch) {
          try {
            dispatch(session.handle(event));
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::session_closed) break;
            if (e.kind() != ErrorKind::unknown_client && e.kind() != ErrorKind::precondition) throw;
            std::cerr << "client " << event.client << ": " << e.what() << "\n";
          }
        }
        if (!session.closed()) dispatch(session.tick());
      } catch (const Error& e) {
        std::cerr << "session error: " << e.what() << "\n";
        return;
      }
      if (session.closed()) return;
    }
  }

  LiveSession& session;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::signal_set signals;
  std::map<std::string, std::shared_ptr<Connection>> connections;
  std::uint64_t next_id = 0;

  std::mutex mutex;
  std::condition_variable wake;
  std::deque<ClientEvent> queue;
  bool stopping = false;
};

WsServer::WsServer(LiveSession& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {}

WsServer::~WsServer() = default;

unsigned short WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::stop() { impl_->request_stop(); }

void WsServer::run() {
  auto& impl = *impl_;
  if (impl.options.handle_signals) {
    impl.signals.add(SIGINT);
    impl.signals.add(SIGTERM);
    impl.signals.async_wait([&impl](beast::error_code ec, int) {
      if (!ec) impl.request_stop();
    });
  }
  impl.accept();
  std::thread io([&impl] { impl.ioc.run(); });

  impl.drive();

  if (impl.options.out) {
    try {
      persist_transcript(impl.session.transcript(), *impl.options.out);
    } catch (const Error& e) {
      std::cerr << "cannot persist transcript: " << e.what() << "\n";
    }
  }
  net::post(impl.ioc, [&impl] { impl.shutdown_io(); });
  io.join();
}

}  // namespace focusagent
