#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reefsim/guidance.hpp"

namespace reefsim::fleetlink {

struct Session {
  double last_seen = 0.0;
  bool stale = false;
  std::optional<std::uint64_t> last_sequence;
};

enum class TelemetryOutcome { Accepted, OutOfOrder };

/// Registered vehicles, keyed by id. Never holds more than kMaxFleetSize
/// sessions.
class FleetRegistry {
 public:
  /// New ids are added while capacity allows (FleetCapacity otherwise); a
  /// known id only refreshes last_seen.
  void register_vehicle(const std::string& vehicle_id, double now);
  bool unregister_vehicle(const std::string& vehicle_id);

  bool contains(const std::string& vehicle_id) const { return sessions_.contains(vehicle_id); }
  std::size_t size() const { return sessions_.size(); }
  const Session& session(const std::string& vehicle_id) const;
  const std::map<std::string, Session>& sessions() const { return sessions_; }

  /// Records a telemetry arrival. Sequences at or below the last accepted
  /// one are rejected without touching the session. Throws UnknownVehicle.
  TelemetryOutcome record_telemetry(const std::string& vehicle_id, std::uint64_t sequence, double now);
  std::size_t rejected_telemetry() const { return rejected_; }

  /// Recomputes every stale flag and returns the stale ids.
  std::vector<std::string> staleness_sweep(double now, double timeout);

  /// Registered, non-stale ids in ascending order.
  std::vector<std::string> dispatchable() const;

 private:
  std::map<std::string, Session> sessions_;
  std::size_t rejected_ = 0;
};

/// The base mission translated by each formation offset, assigned to the
/// first spec.count dispatchable vehicles in id order. Throws Dispatch when
/// too few vehicles are available.
std::vector<std::pair<std::string, guidance::Mission>> dispatch_formation(
    const FleetRegistry& registry, const guidance::Mission& base_mission, const guidance::FormationSpec& spec);

}  // namespace reefsim::fleetlink
