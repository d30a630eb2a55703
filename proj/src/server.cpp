#include "guide/server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "guide/experiment.hpp"

namespace guide::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const sim::Environment& env, const ServerOptions& options, std::uint64_t id)
      : ws_(std::move(socket)), session_(env, with_seed(options.session, id)), options_(options), id_(id),
        timer_(ws_.get_executor()) {}

  void run() {
    beast::error_code ec;
    ws_.accept(ec);
    if (ec) return;
    ws_.text(true);
    read();
    arm_timer();
  }

  void close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_ || self->closing_) return;
      self->closing_ = true;
      self->timer_.cancel();
      self->ws_.async_close(websocket::close_code::going_away, [self](beast::error_code) { self->shutdown(); });
    });
  }

  ~Connection() {
    session_.disconnect();
    save_logs();
  }

 private:
  static session::SessionOptions with_seed(session::SessionOptions o, std::uint64_t id) {
    o.seed += 1000 * id;
    return o;
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->shutdown();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->session_.handle(text));
      self->read();
    });
  }

  void arm_timer() {
    const auto period = std::chrono::duration<double>(1.0 / options_.tick_hz);
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(period));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->send(self->session_.tick());
      self->arm_timer();
    });
  }

  void send(std::vector<std::string> frames) {
    if (closed_) return;
    const bool idle = queue_.empty();
    for (std::string& f : frames) queue_.push_back(std::move(f));
    if (idle && !queue_.empty()) write();
  }

  void write() {
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->shutdown();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
      else if (self->session_.ended()) self->finish();
    });
  }

  void finish() {
    if (closing_) return;
    closing_ = true;
    timer_.cancel();
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) { self->shutdown(); });
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    session_.disconnect();
    save_logs();
  }

  void save_logs() {
    if (options_.log_dir.empty()) return;
    const auto& logs = session_.finished();
    for (; saved_ < logs.size(); ++saved_) {
      std::filesystem::create_directories(options_.log_dir);
      const auto path = options_.log_dir / ("session" + std::to_string(id_) + "_trial" + std::to_string(saved_) +
                                            ".jsonl");
      std::ofstream out(path);
      experiment::write_log(out, logs[saved_]);
    }
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  session::Session session_;
  const ServerOptions& options_;
  std::uint64_t id_;
  asio::steady_timer timer_;
  std::deque<std::string> queue_;
  bool closed_ = false;
  bool closing_ = false;
  std::size_t saved_ = 0;
};

}  // namespace

struct Server::Impl {
  const sim::Environment& env;
  ServerOptions options;
  asio::io_context accept_ctx;
  tcp::acceptor acceptor{accept_ctx};
  std::thread accept_thread;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopped = false;
  struct Worker {
    std::shared_ptr<asio::io_context> ctx;
    std::weak_ptr<Connection> conn;
    std::thread thread;
  };
  std::list<Worker> workers;
  std::atomic<std::uint64_t> next_id{0};

  Impl(const sim::Environment& e, ServerOptions o) : env(e), options(std::move(o)) {}

  void accept_next() {
    auto ctx = std::make_shared<asio::io_context>();
    acceptor.async_accept(*ctx, [this, ctx](beast::error_code ec, tcp::socket socket) {
      std::lock_guard lock(mu);
      if (stopped) return;
      if (!ec) {
        auto conn = std::make_shared<Connection>(std::move(socket), env, options, next_id++);
        Worker& w = workers.emplace_back();
        w.ctx = ctx;
        w.conn = conn;
        w.thread = std::thread([ctx, conn]() mutable {
          conn->run();
          conn.reset();
          ctx->run();
        });
      }
      accept_next();
    });
  }
};

Server::Server(const sim::Environment& env, ServerOptions options)
    : impl_(std::make_unique<Impl>(env, std::move(options))) {
  if (!(impl_->options.tick_hz > 0.0)) throw Error("server: tick rate must be positive");
}

Server::~Server() { stop(); }

void Server::start() {
  Impl& s = *impl_;
  const tcp::endpoint ep(asio::ip::make_address(s.options.address), s.options.port);
  s.acceptor.open(ep.protocol());
  s.acceptor.set_option(asio::socket_base::reuse_address(true));
  s.acceptor.bind(ep);
  s.acceptor.listen();
  s.accept_next();
  s.accept_thread = std::thread([&s] { s.accept_ctx.run(); });
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

void Server::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.mu);
    if (s.stopped) return;
    s.stopped = true;
    asio::post(s.accept_ctx, [&s] {
      beast::error_code ignored;
      s.acceptor.close(ignored);
    });
    for (auto& w : s.workers)
      if (auto c = w.conn.lock()) c->close();
  }
  s.stopped_cv.notify_all();
  if (s.accept_thread.joinable()) s.accept_thread.join();
  for (auto& w : s.workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

}  // namespace guide::server
