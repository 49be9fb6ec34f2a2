#include "reefsim/fleetlink/registry.hpp"

namespace reefsim::fleetlink {

void FleetRegistry::register_vehicle(const std::string& vehicle_id, double now) {
  if (vehicle_id.empty()) throw Error(Errc::InvalidParameter, "vehicle id must not be empty");
  if (auto it = sessions_.find(vehicle_id); it != sessions_.end()) {
    it->second.last_seen = now;
    return;
  }
  if (sessions_.size() >= static_cast<std::size_t>(kMaxFleetSize))
    throw Error(Errc::FleetCapacity, "fleet already has 7 vehicles; cannot register " + vehicle_id);
  sessions_.emplace(vehicle_id, Session{now, false, std::nullopt});
}

bool FleetRegistry::unregister_vehicle(const std::string& vehicle_id) {
  return sessions_.erase(vehicle_id) > 0;
}

const Session& FleetRegistry::session(const std::string& vehicle_id) const {
  const auto it = sessions_.find(vehicle_id);
  if (it == sessions_.end()) throw Error(Errc::UnknownVehicle, "unknown vehicle " + vehicle_id);
  return it->second;
}

TelemetryOutcome FleetRegistry::record_telemetry(const std::string& vehicle_id, std::uint64_t sequence,
                                                 double now) {
  const auto it = sessions_.find(vehicle_id);
  if (it == sessions_.end()) throw Error(Errc::UnknownVehicle, "telemetry from unknown vehicle " + vehicle_id);
  Session& s = it->second;
  if (s.last_sequence && sequence <= *s.last_sequence) {
    ++rejected_;
    return TelemetryOutcome::OutOfOrder;
  }
  s.last_sequence = sequence;
  s.last_seen = now;
  return TelemetryOutcome::Accepted;
}

std::vector<std::string> FleetRegistry::staleness_sweep(double now, double timeout) {
  if (!(timeout > 0.0)) throw Error(Errc::InvalidParameter, "staleness timeout must be positive");
  std::vector<std::string> stale;
  for (auto& [id, s] : sessions_) {
    s.stale = now - s.last_seen > timeout;
    if (s.stale) stale.push_back(id);
  }
  return stale;
}

std::vector<std::string> FleetRegistry::dispatchable() const {
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_)
    if (!s.stale) ids.push_back(id);
  return ids;
}

std::vector<std::pair<std::string, guidance::Mission>> dispatch_formation(
    const FleetRegistry& registry, const guidance::Mission& base_mission, const guidance::FormationSpec& spec) {
  base_mission.validate();
  const auto offsets = guidance::formation_offsets(spec);
  const auto ids = registry.dispatchable();
  if (ids.size() < offsets.size())
    throw Error(Errc::Dispatch, "formation needs " + std::to_string(offsets.size()) + " vehicles but only " +
                                    std::to_string(ids.size()) + " are available");
  std::vector<std::pair<std::string, guidance::Mission>> out;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    out.emplace_back(ids[i], guidance::translate_mission(base_mission, offsets[i]));
  return out;
}

}  // namespace reefsim::fleetlink
