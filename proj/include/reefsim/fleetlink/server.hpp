#pragma once
// Network front ends of the fleet service: the framed TCP protocol for
// vehicles and ground stations, and an HTTP channel for the web console
// (server-sent telemetry events plus JSON command posts).

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "reefsim/fleetlink/service.hpp"

namespace httplib {
class Server;
}

namespace reefsim::fleetlink {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t tcp_port = kDefaultPort;  // 0 picks a free port
  int http_port = 8077;                   // 0 picks a free port, -1 disables
  std::string console_dir;                // static console bundle, optional
  double tick_rate_hz = 2.0;
  double time_scale = 1.0;                // simulated seconds per wall second
  std::size_t subscriber_queue = 256;
};

class FleetServer {
 public:
  FleetServer(FleetService& service, ServerOptions options);
  ~FleetServer();
  FleetServer(const FleetServer&) = delete;
  FleetServer& operator=(const FleetServer&) = delete;

  /// Binds both listeners and starts the simulation loop. Throws Io.
  void start();
  void stop();

  std::uint16_t tcp_port() const { return tcp_port_; }
  int http_port() const { return http_port_; }
  std::uint64_t ticks() const { return ticks_.load(); }

  /// Runs `fn` with exclusive access to the service.
  template <typename Fn>
  auto with_service(Fn&& fn) {
    std::lock_guard lock(service_mu_);
    return fn(service_);
  }

 private:
  struct Connection;

  void sim_loop();
  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);
  void setup_http();

  FleetService& service_;
  ServerOptions options_;
  std::mutex service_mu_;
  TelemetryHub frames_;  // encoded frames for TCP clients
  TelemetryHub feed_;    // JSON text for console subscribers

  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> ticks_{0};
  int listen_fd_ = -1;
  std::uint16_t tcp_port_ = 0;
  int http_port_ = -1;
  std::unique_ptr<httplib::Server> http_;
  std::thread sim_thread_;
  std::thread accept_thread_;
  std::thread http_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
};

/// Blocking client for the framed protocol, used by tools and tests.
class FleetClient {
 public:
  FleetClient(const std::string& host, std::uint16_t port);
  ~FleetClient();
  FleetClient(const FleetClient&) = delete;
  FleetClient& operator=(const FleetClient&) = delete;

  void send(const Message& msg);
  /// Next decoded message, nullopt after `timeout_ms` without one.
  std::optional<Message> receive(int timeout_ms);
  /// Sends a command and waits for its reply, skipping telemetry.
  CommandReply request(const CommandMessage& msg, int timeout_ms = 2000);

 private:
  int fd_ = -1;
  FrameReader reader_;
};

}  // namespace reefsim::fleetlink
