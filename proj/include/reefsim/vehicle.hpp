#pragma once
// Differential-drive surface vehicle: kinematics, battery and payload.

#include <variant>

#include "reefsim/common.hpp"

namespace reefsim::vehicle {

struct VehicleParams {
  double cruise_speed_max = 0.75;  // m/s at full symmetric thrust
  double omega_max = 0.5;          // rad/s at full differential thrust
  double endurance_s = 7200.0;     // full-thrust battery life
  double bladder_capacity_l = 100.0;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

struct Collection {
  friend bool operator==(const Collection&, const Collection&) = default;
};
struct Dispersal {
  double bladder_capacity_l = 100.0;
  friend bool operator==(const Dispersal&, const Dispersal&) = default;
};
struct Monitoring {
  double camera_footprint_m = 3.0;
  friend bool operator==(const Monitoring&, const Monitoring&) = default;
};

using PayloadConfig = std::variant<Collection, Dispersal, Monitoring>;

/// Throws InvalidParameter for a non-positive bladder capacity or footprint.
void validate(const PayloadConfig& config);

struct VehicleState {
  Pose2D pose;
  double speed = 0.0;  // signed forward speed through the water, m/s
  double battery_remaining = 1.0;
  PayloadConfig payload = Monitoring{};
  double bladder_volume_l = 0.0;
  int drive_sign = 1;  // -1 iff payload is Collection
  double time = 0.0;

  bool dead() const { return battery_remaining <= 0.0; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Normalized thrust pair, clamped to [-1, 1] on construction.
class ThrusterCommand {
 public:
  ThrusterCommand() = default;
  ThrusterCommand(double left, double right);

  double left() const { return left_; }
  double right() const { return right_; }

 private:
  double left_ = 0.0;
  double right_ = 0.0;
};

/// One explicit-Euler step of the unicycle model. Forward speed is
/// drive_sign * cruise * (l + r) / 2, yaw rate omega_max * (r - l) / 2, and
/// the battery drains by (|l| + |r|) / 2 * dt / endurance. A dead vehicle
/// only advances its clock.
VehicleState step_dynamics(const VehicleState& state, const ThrusterCommand& cmd, Vec2 wind,
                           double dt, const VehicleParams& params = {});

/// Dockside reconfiguration; throws InvalidState while |speed| >= 0.01 m/s.
VehicleState configure_payload(const VehicleState& state, const PayloadConfig& config);

/// Seconds of operation left at the given thrust duty cycle.
double endurance_estimate(const VehicleState& state, double duty, const VehicleParams& params = {});

}  // namespace reefsim::vehicle
