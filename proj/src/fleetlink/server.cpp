#include "reefsim/fleetlink/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>

#include "httplib.h"
#include "json.hpp"

namespace reefsim::fleetlink {

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(Errc::Io, what + ": " + std::strerror(errno));
}

bool send_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t sent = ::send(fd, data, n, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += sent;
    n -= static_cast<std::size_t>(sent);
  }
  return true;
}

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

struct FleetServer::Connection {
  int fd;
  std::shared_ptr<TelemetryHub::Subscription> outbox;
};

FleetServer::FleetServer(FleetService& service, ServerOptions options)
    : service_(service),
      options_(std::move(options)),
      frames_(options_.subscriber_queue),
      feed_(options_.subscriber_queue) {
  if (!(options_.tick_rate_hz > 0.0) || !(options_.time_scale > 0.0))
    throw Error(Errc::InvalidParameter, "tick rate and time scale must be positive");
}

FleetServer::~FleetServer() { stop(); }

void FleetServer::start() {
  if (running_.exchange(true)) return;

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) sys_fail("socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.tcp_port);
  if (::inet_pton(AF_INET, options_.bind_address.c_str(), &addr.sin_addr) != 1)
    throw Error(Errc::InvalidParameter, "bad bind address " + options_.bind_address);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("bind");
  if (::listen(listen_fd_, 16) < 0) sys_fail("listen");
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  tcp_port_ = ntohs(addr.sin_port);

  if (options_.http_port >= 0) {
    setup_http();
    if (options_.http_port == 0)
      http_port_ = http_->bind_to_any_port(options_.bind_address);
    else
      http_port_ = http_->bind_to_port(options_.bind_address, options_.http_port) ? options_.http_port : -1;
    if (http_port_ < 0) throw Error(Errc::Io, "cannot bind console HTTP port");
    http_thread_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
  }

  accept_thread_ = std::thread([this] { accept_loop(); });
  sim_thread_ = std::thread([this] { sim_loop(); });
}

void FleetServer::stop() {
  if (!running_.exchange(false)) return;
  if (http_) http_->stop();
  frames_.close_all();
  feed_.close_all();
  if (sim_thread_.joinable()) sim_thread_.join();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (http_thread_.joinable()) http_thread_.join();
  std::vector<std::thread> conns;
  {
    std::lock_guard lock(conn_mu_);
    conns.swap(conn_threads_);
  }
  for (auto& t : conns)
    if (t.joinable()) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void FleetServer::sim_loop() {
  const double dt = 1.0 / options_.tick_rate_hz;
  const auto period = std::chrono::duration<double>(dt / options_.time_scale);
  auto next = std::chrono::steady_clock::now();
  while (running_) {
    std::vector<TelemetryMessage> telemetry;
    {
      std::lock_guard lock(service_mu_);
      telemetry = service_.tick(dt);
    }
    ++ticks_;
    for (const auto& t : telemetry) {
      frames_.publish(as_string(encode_message(t)));
      feed_.publish(to_json(t));
    }
    next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
    std::this_thread::sleep_until(next);
  }
}

void FleetServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Connection>(Connection{fd, frames_.subscribe()});
    std::lock_guard lock(conn_mu_);
    conn_threads_.emplace_back([this, conn] { serve_connection(conn); });
  }
}

void FleetServer::serve_connection(std::shared_ptr<Connection> conn) {
  std::atomic<bool> open{true};
  std::thread writer([&] {
    while (open && running_) {
      auto frame = conn->outbox->pop(100);
      if (!frame) continue;
      if (!send_all(conn->fd, reinterpret_cast<const std::uint8_t*>(frame->data()), frame->size())) open = false;
    }
  });

  FrameReader reader;
  std::uint8_t buf[4096];
  while (open && running_) {
    pollfd pfd{conn->fd, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) continue;
    const ssize_t n = ::recv(conn->fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    try {
      reader.feed({buf, static_cast<std::size_t>(n)});
      while (auto frame = reader.next_frame()) {
        Message msg;
        try {
          msg = decode_message(*frame);
        } catch (const Error& e) {
          // A well-framed but invalid message is answered, not fatal.
          const CommandReply reply{"?", false, std::string("decode error: ") + e.what()};
          conn->outbox->push(as_string(encode_message(reply)));
          continue;
        }
        if (const auto* cmd = std::get_if<CommandMessage>(&msg)) {
          CommandReply reply;
          {
            std::lock_guard lock(service_mu_);
            reply = service_.handle(*cmd);
          }
          conn->outbox->push(as_string(encode_message(reply)));
        } else if (const auto* tel = std::get_if<TelemetryMessage>(&msg)) {
          std::lock_guard lock(service_mu_);
          try {
            service_.ingest(*tel);
          } catch (const Error&) {
            // unregistered sender; dropped
          }
        }
      }
    } catch (const Error&) {
      break;  // framing error: the stream cannot be resynchronized
    }
  }
  open = false;
  writer.join();
  frames_.unsubscribe(conn->outbox);
  ::close(conn->fd);
}

void FleetServer::setup_http() {
  http_ = std::make_unique<httplib::Server>();
  if (!options_.console_dir.empty() && std::filesystem::is_directory(options_.console_dir))
    http_->set_mount_point("/", options_.console_dir);

  http_->Get("/api/feed", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = feed_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub](std::size_t, httplib::DataSink& sink) {
          if (!running_) return false;
          if (auto msg = sub->pop(200)) {
            const std::string chunk = "data: " + *msg + "\n\n";
            return sink.write(chunk.data(), chunk.size());
          }
          const std::string keepalive = ": keepalive\n\n";
          return sink.write(keepalive.data(), keepalive.size());
        },
        [this, sub](bool) { feed_.unsubscribe(sub); });
  });

  http_->Post("/api/command", [this](const httplib::Request& req, httplib::Response& res) {
    CommandReply reply{"?", false, ""};
    try {
      const Message msg = from_json(MessageType::Command, req.body);
      std::lock_guard lock(service_mu_);
      reply = service_.handle(std::get<CommandMessage>(msg));
    } catch (const Error& e) {
      reply.reason = std::string("decode error: ") + e.what();
      res.status = 400;
    }
    res.set_content(to_json(reply), "application/json");
  });

  http_->Get("/api/fleet", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    {
      std::lock_guard lock(service_mu_);
      for (const auto& [id, s] : service_.registry().sessions())
        j.push_back({{"vehicle_id", id}, {"last_seen", s.last_seen}, {"stale", s.stale}});
    }
    res.set_content(j.dump(), "application/json");
  });
}

// --- client -------------------------------------------------------------------

FleetClient::FleetClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw Error(Errc::Io, "cannot resolve " + host);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) < 0) {
    ::freeaddrinfo(res);
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    sys_fail("connect to " + host + ":" + std::to_string(port));
  }
  ::freeaddrinfo(res);
}

FleetClient::~FleetClient() {
  if (fd_ >= 0) ::close(fd_);
}

void FleetClient::send(const Message& msg) {
  const auto frame = encode_message(msg);
  if (!send_all(fd_, frame.data(), frame.size())) sys_fail("send");
}

std::optional<Message> FleetClient::receive(int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  std::uint8_t buf[4096];
  while (true) {
    if (auto frame = reader_.next_frame()) return decode_message(*frame);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{fd_, POLLIN, 0};
    if (::poll(&pfd, 1, static_cast<int>(left.count())) <= 0) continue;
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) throw Error(Errc::Io, "connection closed");
    reader_.feed({buf, static_cast<std::size_t>(n)});
  }
}

CommandReply FleetClient::request(const CommandMessage& msg, int timeout_ms) {
  send(msg);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (std::chrono::steady_clock::now() < deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    auto reply = receive(static_cast<int>(std::max<long>(1, left.count())));
    if (!reply) break;
    if (const auto* r = std::get_if<CommandReply>(&*reply)) return *r;
  }
  throw Error(Errc::Timeout, "no reply from fleet service");
}

}  // namespace reefsim::fleetlink
