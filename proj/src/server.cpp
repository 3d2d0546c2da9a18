#include "mirroreyes/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <csignal>
#include <deque>
#include <fstream>
#include <map>

namespace mirroreyes {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

using detail::Connection;

struct SessionServer::Impl {
  Impl(SessionConfig config, ServerOptions opts);

  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started)
        .count();
  }
  void accept();
  void schedule_tick();
  void dispatch(std::vector<Outbound> out);

  ServerOptions options;
  Clock::time_point started = Clock::now();
  asio::io_context io;
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  std::chrono::nanoseconds period;
  std::uint64_t ticks = 0;
  std::ofstream log_file;
  std::unique_ptr<Session> session;
  std::map<ConnectionId, std::shared_ptr<Connection>> connections;
  ConnectionId next_id = 1;
};

namespace detail {

class Connection : public std::enable_shared_from_this<Connection> {
public:
  Connection(tcp::socket socket, SessionServer::Impl& server, ConnectionId id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  void start() {
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->server_.connections[self->id_] = self;
      self->server_.session->connect(self->id_);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    if (queue_.size() >= server_.options.max_queue) return close();
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    server_.session->disconnect(id_);
    server_.connections.erase(id_);
    beast::error_code ignored;
    ws_.next_layer().close(ignored);
  }

private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      auto& srv = self->server_;
      srv.dispatch(srv.session->on_text(self->id_, text, srv.now_ms()));
      self->read();
    });
  }

  void write() {
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->close();
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  websocket::stream<tcp::socket> ws_;
  SessionServer::Impl& server_;
  ConnectionId id_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

}  // namespace detail

SessionServer::Impl::Impl(SessionConfig config, ServerOptions opts)
    : options(std::move(opts)),
      acceptor(io),
      timer(io),
      period(std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double>(1.0 / config.display_rate_hz))) {
  const tcp::endpoint endpoint(asio::ip::make_address(options.address), options.port);
  acceptor.open(endpoint.protocol());
  acceptor.set_option(asio::socket_base::reuse_address(true));
  acceptor.bind(endpoint);
  acceptor.listen();
  std::ostream* log = nullptr;
  if (!options.log_path.empty()) {
    log_file.open(options.log_path);
    if (!log_file) throw std::runtime_error("cannot write log " + options.log_path.string());
    log = &log_file;
  }
  session = std::make_unique<Session>(std::move(config), options.session, log, 0);
}

void SessionServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Connection>(std::move(socket), *this, next_id++)->start();
    accept();
  });
}

void SessionServer::Impl::schedule_tick() {
  // Absolute deadlines keep the period free of drift.
  timer.expires_at(started + period * static_cast<std::int64_t>(++ticks));
  timer.async_wait([this](beast::error_code ec) {
    if (ec) return;
    dispatch(session->tick(now_ms()));
    schedule_tick();
  });
}

void SessionServer::Impl::dispatch(std::vector<Outbound> out) {
  for (auto& o : out) {
    const std::string text = encode_message(o.message);
    if (o.to) {
      if (const auto it = connections.find(*o.to); it != connections.end()) {
        const auto c = it->second;
        c->send(text);
      }
    } else {
      // Copy: a send may close and erase its connection.
      auto targets = connections;
      for (auto& [id, c] : targets) c->send(text);
    }
  }
}

SessionServer::SessionServer(SessionConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

SessionServer::~SessionServer() = default;

std::uint16_t SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run(bool handle_signals) {
  asio::signal_set signals(impl_->io);
  if (handle_signals) {
    signals.add(SIGINT);
    signals.add(SIGTERM);
    signals.async_wait([this](beast::error_code, int) { stop(); });
  }
  impl_->accept();
  impl_->schedule_tick();
  impl_->io.run();
  if (impl_->log_file.is_open()) impl_->log_file.flush();
}

void SessionServer::stop() {
  asio::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    impl->timer.cancel();
    auto all = impl->connections;
    for (auto& [id, c] : all) c->close();
    impl->io.stop();
  });
}

}  // namespace mirroreyes
