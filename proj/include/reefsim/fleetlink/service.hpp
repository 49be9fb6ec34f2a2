#pragma once
// Fleet-control service: command handling, telemetry production for
// simulated vehicles, and telemetry fan-out to subscribers.

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "reefsim/fleetlink/messages.hpp"
#include "reefsim/fleetlink/registry.hpp"
#include "reefsim/sim/runner.hpp"

namespace reefsim::fleetlink {

struct ServiceConfig {
  sim::VehicleSimConfig vehicle;
  perception::ClassifierModel classifier;
  double staleness_timeout_s = 5.0;
  reefworld::WindField wind;
};

/// Not thread-safe; the network layer serializes access.
class FleetService {
 public:
  FleetService(std::shared_ptr<const reefworld::BenthicMap> map, ServiceConfig config);

  /// Registers a simulated vehicle. Throws FleetCapacity past seven.
  void add_simulated_vehicle(const std::string& vehicle_id, vehicle::Pose2D start);

  /// Applies a command. Unknown vehicles and commands that cannot be applied
  /// produce a rejection reply; Stop is accepted for any registered vehicle.
  CommandReply handle(const CommandMessage& msg);

  /// Telemetry arriving from an external vehicle. Unknown ids are rejected
  /// with UnknownVehicle; out-of-order sequences are dropped.
  TelemetryOutcome ingest(const TelemetryMessage& msg);

  /// Steps every simulated vehicle by dt and returns their telemetry.
  std::vector<TelemetryMessage> tick(double dt);

  /// Translates the base mission per formation slot and uploads it.
  std::vector<std::pair<std::string, guidance::Mission>> dispatch(const guidance::Mission& base,
                                                                  const guidance::FormationSpec& spec);

  /// Simulates radio loss: a vehicle with its link down keeps moving but
  /// sends no telemetry, so it goes stale.
  void set_link(const std::string& vehicle_id, bool up);

  double now() const { return now_; }
  const FleetRegistry& registry() const { return registry_; }
  const sim::VehicleSim* vehicle(const std::string& vehicle_id) const;

 private:
  std::shared_ptr<const reefworld::BenthicMap> map_;
  ServiceConfig config_;
  FleetRegistry registry_;
  std::map<std::string, std::unique_ptr<sim::VehicleSim>> sims_;
  std::map<std::string, std::uint64_t> sequences_;
  std::set<std::string> link_down_;
  double now_ = 0.0;
};

/// Broadcast of encoded frames to any number of subscribers. Each
/// subscriber has a bounded queue; when it is full the oldest frame is
/// dropped so a slow reader never holds up the publisher.
class TelemetryHub {
 public:
  class Subscription {
   public:
    explicit Subscription(std::size_t capacity) : capacity_(capacity) {}
    /// Waits up to `timeout_ms` for a frame; nullopt on timeout or close.
    std::optional<std::string> pop(int timeout_ms);
    /// Enqueues a frame, evicting the oldest one when full.
    void push(const std::string& frame);
    std::size_t dropped() const;
    void close();

   private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    std::size_t capacity_;
    std::size_t dropped_ = 0;
    bool closed_ = false;
  };

  explicit TelemetryHub(std::size_t queue_capacity = 256) : capacity_(queue_capacity) {}

  std::shared_ptr<Subscription> subscribe();
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  void publish(const std::string& frame);
  std::size_t subscriber_count() const;
  void close_all();

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  std::size_t capacity_;
};

}  // namespace reefsim::fleetlink
