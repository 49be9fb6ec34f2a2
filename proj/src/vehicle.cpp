#include "reefsim/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace reefsim::vehicle {

namespace {
// Absorbs the rounding left over after summing many dt/endurance decrements.
constexpr double kBatteryFloor = 1e-9;
}  // namespace

void validate(const PayloadConfig& config) {
  if (const auto* d = std::get_if<Dispersal>(&config); d && !(d->bladder_capacity_l > 0.0))
    throw Error(Errc::InvalidParameter, "bladder capacity must be positive");
  if (const auto* m = std::get_if<Monitoring>(&config); m && !(m->camera_footprint_m > 0.0))
    throw Error(Errc::InvalidParameter, "camera footprint must be positive");
}

ThrusterCommand::ThrusterCommand(double left, double right)
    : left_(std::clamp(std::isnan(left) ? 0.0 : left, -1.0, 1.0)),
      right_(std::clamp(std::isnan(right) ? 0.0 : right, -1.0, 1.0)) {}

VehicleState step_dynamics(const VehicleState& state, const ThrusterCommand& cmd, Vec2 wind,
                           double dt, const VehicleParams& params) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");

  VehicleState next = state;
  next.time = state.time + dt;
  if (state.dead()) {
    next.speed = 0.0;
    return next;
  }

  const double v = state.drive_sign * params.cruise_speed_max * (cmd.left() + cmd.right()) / 2.0;
  const double omega = params.omega_max * (cmd.right() - cmd.left()) / 2.0;
  const double h = state.pose.heading;

  next.pose.x = state.pose.x + (v * std::cos(h) + wind.x) * dt;
  next.pose.y = state.pose.y + (v * std::sin(h) + wind.y) * dt;
  next.pose.heading = normalize_angle(h + omega * dt);
  next.speed = v;

  const double drain = (std::fabs(cmd.left()) + std::fabs(cmd.right())) / 2.0 * dt / params.endurance_s;
  next.battery_remaining = state.battery_remaining - drain;
  if (next.battery_remaining < kBatteryFloor) next.battery_remaining = 0.0;
  return next;
}

VehicleState configure_payload(const VehicleState& state, const PayloadConfig& config) {
  if (std::fabs(state.speed) >= 0.01)
    throw Error(Errc::InvalidState, "payload can only be reconfigured while stationary");
  validate(config);

  VehicleState next = state;
  next.payload = config;
  next.drive_sign = std::holds_alternative<Collection>(config) ? -1 : 1;
  if (const auto* d = std::get_if<Dispersal>(&config))
    next.bladder_volume_l = d->bladder_capacity_l;
  else
    next.bladder_volume_l = 0.0;
  return next;
}

double endurance_estimate(const VehicleState& state, double duty, const VehicleParams& params) {
  if (!(duty > 0.0)) throw Error(Errc::UndefinedEndurance, "endurance is undefined at zero duty");
  if (duty > 1.0) throw Error(Errc::InvalidParameter, "duty must be in (0, 1]");
  return state.battery_remaining * params.endurance_s / duty;
}

}  // namespace reefsim::vehicle
