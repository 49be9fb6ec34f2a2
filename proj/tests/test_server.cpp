#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "reefsim/fleetlink/server.hpp"

using namespace reefsim;
using namespace reefsim::fleetlink;

namespace {

struct Fixture {
  std::unique_ptr<FleetService> service;
  std::unique_ptr<FleetServer> server;

  explicit Fixture(int vehicles, std::size_t queue = 256) {
    auto map = std::make_shared<const reefworld::BenthicMap>(reefworld::generate_reef(2, 50, 50, 1.0, 0.5, 0.3));
    ServiceConfig cfg;
    cfg.classifier = perception::calibrate_model("WatsonFieldModel", 4);
    service = std::make_unique<FleetService>(map, cfg);
    for (int i = 1; i <= vehicles; ++i)
      service->add_simulated_vehicle("asv-" + std::to_string(i), {1.0, 5.0 * i, 0.0});
    ServerOptions opt;
    opt.tcp_port = 0;
    opt.http_port = 0;
    opt.tick_rate_hz = 20.0;
    opt.time_scale = 10.0;
    opt.subscriber_queue = queue;
    server = std::make_unique<FleetServer>(*service, opt);
    server->start();
  }
};

guidance::Mission line_mission() {
  guidance::Mission m;
  m.waypoints = {{1.0, 5.0}, {45.0, 5.0}};
  return m;
}

int raw_connect(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  return fd;
}

}  // namespace

TEST_CASE("framed protocol: telemetry stream and command replies") {
  Fixture f(2);
  REQUIRE(f.server->tcp_port() != 0);
  FleetClient client("127.0.0.1", f.server->tcp_port());

  std::map<std::string, std::uint64_t> seen;
  for (int i = 0; i < 20; ++i) {
    auto msg = client.receive(2000);
    REQUIRE(msg.has_value());
    const auto& t = std::get<TelemetryMessage>(*msg);
    CHECK(t.sequence > seen[t.vehicle_id]);
    seen[t.vehicle_id] = t.sequence;
  }
  CHECK(seen.size() == 2u);

  CHECK(client.request({"asv-1", UploadMission{line_mission()}}).accepted);
  CHECK(client.request({"asv-1", Start{}}).accepted);
  const auto unknown = client.request({"asv-9", Start{}});
  CHECK_FALSE(unknown.accepted);
  CHECK(unknown.reason == "unknown vehicle");

  // the vehicle moves under the live loop
  double x = 0.0;
  for (int i = 0; i < 200 && x < 3.0; ++i) {
    auto msg = client.receive(2000);
    REQUIRE(msg.has_value());
    if (const auto* t = std::get_if<TelemetryMessage>(&*msg); t && t->vehicle_id == "asv-1") x = t->pose.x;
  }
  CHECK(x >= 3.0);
  CHECK(f.server->ticks() > 0u);
}

TEST_CASE("framed protocol: bad frames") {
  Fixture f(1);
  SUBCASE("well-framed garbage is answered") {
    const int fd = raw_connect(f.server->tcp_port());
    const std::string junk = "{nope}";
    std::vector<std::uint8_t> frame{0, 0, 0, static_cast<std::uint8_t>(junk.size()), 2};
    frame.insert(frame.end(), junk.begin(), junk.end());
    REQUIRE(::send(fd, frame.data(), frame.size(), 0) == static_cast<ssize_t>(frame.size()));
    FrameReader reader;
    std::uint8_t buf[4096];
    bool got_reply = false;
    for (int i = 0; i < 100 && !got_reply; ++i) {
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      REQUIRE(n > 0);
      reader.feed({buf, static_cast<std::size_t>(n)});
      while (auto fr = reader.next_frame()) {
        const auto msg = decode_message(*fr);
        if (const auto* r = std::get_if<CommandReply>(&msg)) {
          CHECK_FALSE(r->accepted);
          CHECK(r->reason.find("decode error") == 0);
          got_reply = true;
        }
      }
    }
    CHECK(got_reply);
    ::close(fd);
  }
  SUBCASE("illegal length drops the connection") {
    const int fd = raw_connect(f.server->tcp_port());
    const std::uint8_t frame[] = {0xff, 0xff, 0xff, 0xff, 1};
    ::send(fd, frame, sizeof frame, 0);
    std::uint8_t buf[4096];
    ssize_t n = 1;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (n > 0 && std::chrono::steady_clock::now() < deadline) n = ::recv(fd, buf, sizeof buf, 0);
    CHECK(n == 0);
    ::close(fd);
  }
}

TEST_CASE("console channel: fleet listing, commands and event feed") {
  Fixture f(3);
  REQUIRE(f.server->http_port() > 0);
  httplib::Client http("127.0.0.1", f.server->http_port());
  http.set_read_timeout(5, 0);

  const auto fleet = http.Get("/api/fleet");
  REQUIRE(fleet);
  CHECK(fleet->status == 200);
  const auto list = nlohmann::json::parse(fleet->body);
  CHECK(list.size() == 3u);
  CHECK(list[0]["vehicle_id"] == "asv-1");

  const std::string upload = to_json(CommandMessage{"asv-2", UploadMission{line_mission()}});
  const auto ok = http.Post("/api/command", upload, "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(nlohmann::json::parse(ok->body)["accepted"] == true);

  const auto bad = http.Post("/api/command", "{\"vehicle_id\":\"asv-2\"}", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(nlohmann::json::parse(bad->body)["accepted"] == false);

  std::string received;
  int events = 0;
  http.Get("/api/feed", [&](const char* data, std::size_t len) {
    received.append(data, len);
    std::size_t pos = 0;
    events = 0;
    while ((pos = received.find("data: ", pos)) != std::string::npos) {
      ++events;
      pos += 6;
    }
    return events < 5;
  });
  REQUIRE(events >= 5);
  const auto start = received.find("data: ") + 6;
  const auto end = received.find("\n\n", start);
  const std::string first = received.substr(start, end - start);
  const auto msg = from_json(MessageType::Telemetry, first);
  CHECK(std::get<TelemetryMessage>(msg).vehicle_id.rfind("asv-", 0) == 0);
}

TEST_CASE("slow TCP readers lose old frames, not the server") {
  Fixture f(7, 8);
  const int fd = raw_connect(f.server->tcp_port());
  std::this_thread::sleep_for(std::chrono::milliseconds(800));
  // service keeps ticking while we ignore the socket
  const auto before = f.server->ticks();
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(f.server->ticks() > before);
  ::close(fd);
  FleetClient client("127.0.0.1", f.server->tcp_port());
  CHECK(client.receive(2000).has_value());
}

TEST_CASE("server lifecycle") {
  Fixture f(1);
  f.server->stop();
  f.server->stop();
  CHECK_THROWS_AS(FleetClient("127.0.0.1", f.server->tcp_port()), Error);
  ServerOptions bad;
  bad.tick_rate_hz = 0.0;
  CHECK_THROWS_AS(FleetServer(*f.service, bad), Error);
}
