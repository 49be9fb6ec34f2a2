#include "reefsim/fleetlink/service.hpp"

#include <algorithm>
#include <chrono>

namespace reefsim::fleetlink {

FleetService::FleetService(std::shared_ptr<const reefworld::BenthicMap> map, ServiceConfig config)
    : map_(std::move(map)), config_(std::move(config)) {
  if (!map_) throw Error(Errc::InvalidParameter, "fleet service needs a map");
  if (!(config_.staleness_timeout_s > 0.0))
    throw Error(Errc::InvalidParameter, "staleness timeout must be positive");
}

void FleetService::add_simulated_vehicle(const std::string& vehicle_id, vehicle::Pose2D start) {
  if (sims_.contains(vehicle_id)) throw Error(Errc::InvalidState, "vehicle " + vehicle_id + " already exists");
  registry_.register_vehicle(vehicle_id, now_);
  perception::ClassifierModel model = config_.classifier;
  // Independent stream per vehicle.
  model.rng_seed = sim::classifier_seed(config_.classifier.rng_seed + sims_.size() + 1);
  const auto id = static_cast<std::uint32_t>(sims_.size());
  auto vsim = std::make_unique<sim::VehicleSim>(id, map_, config_.vehicle,
                                                std::make_unique<perception::EmulatedClassifier>(model), start);
  vsim->set_payload(vehicle::Dispersal{config_.vehicle.vehicle.bladder_capacity_l});
  sims_.emplace(vehicle_id, std::move(vsim));
}

const sim::VehicleSim* FleetService::vehicle(const std::string& vehicle_id) const {
  const auto it = sims_.find(vehicle_id);
  return it == sims_.end() ? nullptr : it->second.get();
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

CommandReply FleetService::handle(const CommandMessage& msg) {
  CommandReply reply{msg.vehicle_id, false, ""};
  if (!registry_.contains(msg.vehicle_id)) {
    reply.reason = "unknown vehicle";
    return reply;
  }
  const auto it = sims_.find(msg.vehicle_id);
  if (std::holds_alternative<Stop>(msg.command)) {
    if (it != sims_.end()) it->second->stop();
    reply.accepted = true;
    return reply;
  }
  if (std::holds_alternative<UploadMission>(msg.command) && registry_.session(msg.vehicle_id).stale) {
    reply.reason = "vehicle is stale";
    return reply;
  }
  if (it == sims_.end() || link_down_.contains(msg.vehicle_id)) {
    reply.reason = "vehicle has no command link";
    return reply;
  }
  sim::VehicleSim& v = *it->second;
  try {
    std::visit(overloaded{
                   [&](const UploadMission& c) { v.upload_mission(c.mission); },
                   [&](const SetPayload& c) { v.set_payload(c.payload); },
                   [&](const SetDispersalMode& c) { v.set_mode(c.mode); },
                   [&](const Start&) { v.start(); },
                   [&](const Stop&) { v.stop(); },
                   [&](const ReturnHome&) { v.return_home(); },
               },
               msg.command);
    reply.accepted = true;
  } catch (const Error& e) {
    reply.reason = e.what();
  }
  return reply;
}

TelemetryOutcome FleetService::ingest(const TelemetryMessage& msg) {
  return registry_.record_telemetry(msg.vehicle_id, msg.sequence, now_);
}

std::vector<TelemetryMessage> FleetService::tick(double dt) {
  std::vector<TelemetryMessage> out;
  const Vec2 wind = reefworld::wind_drift(config_.wind, now_);
  for (auto& [id, v] : sims_) {
    v->tick(dt, wind);
    if (link_down_.contains(id)) continue;
    TelemetryMessage t;
    t.vehicle_id = id;
    t.sequence = ++sequences_[id];
    t.timestamp = v->state().time;
    t.pose = v->state().pose;
    t.battery = v->state().battery_remaining;
    t.gauge = std::holds_alternative<vehicle::Dispersal>(v->state().payload)
                  ? dispersal::fuel_gauge(v->bladder()).fraction
                  : 0.0;
    if (const auto& e = v->last_event()) t.last_decision = Decision{e->position, e->predicted};
    t.waypoint_index = v->waypoint_index();
    t.mission_complete = v->mission_complete();
    out.push_back(t);
  }
  now_ += dt;
  for (const auto& t : out) registry_.record_telemetry(t.vehicle_id, t.sequence, now_);
  registry_.staleness_sweep(now_, config_.staleness_timeout_s);
  return out;
}

void FleetService::set_link(const std::string& vehicle_id, bool up) {
  if (!sims_.contains(vehicle_id)) throw Error(Errc::UnknownVehicle, "unknown vehicle " + vehicle_id);
  if (up) link_down_.erase(vehicle_id);
  else link_down_.insert(vehicle_id);
}

std::vector<std::pair<std::string, guidance::Mission>> FleetService::dispatch(const guidance::Mission& base,
                                                                              const guidance::FormationSpec& spec) {
  auto plan = dispatch_formation(registry_, base, spec);
  for (const auto& [id, mission] : plan) {
    const auto reply = handle({id, UploadMission{mission}});
    if (!reply.accepted) throw Error(Errc::Dispatch, "vehicle " + id + " rejected its mission: " + reply.reason);
  }
  return plan;
}

// --- TelemetryHub -----------------------------------------------------------

void TelemetryHub::Subscription::push(const std::string& frame) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(frame);
  }
  cv_.notify_one();
}

std::optional<std::string> TelemetryHub::Subscription::pop(int timeout_ms) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  std::string frame = std::move(queue_.front());
  queue_.pop_front();
  return frame;
}

std::size_t TelemetryHub::Subscription::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void TelemetryHub::Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::shared_ptr<TelemetryHub::Subscription> TelemetryHub::subscribe() {
  auto sub = std::make_shared<Subscription>(capacity_);
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void TelemetryHub::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  sub->close();
  std::lock_guard lock(mu_);
  std::erase(subs_, sub);
}

void TelemetryHub::publish(const std::string& frame) {
  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mu_);
    subs = subs_;
  }
  for (const auto& s : subs) s->push(frame);
}

std::size_t TelemetryHub::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subs_.size();
}

void TelemetryHub::close_all() {
  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mu_);
    subs.swap(subs_);
  }
  for (const auto& s : subs) s->close();
}

}  // namespace reefsim::fleetlink
