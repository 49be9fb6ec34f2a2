#pragma once
// Per-vehicle tick loop and the scenario runner.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reefsim/metrics.hpp"
#include "reefsim/sim/scenario.hpp"

namespace reefsim::sim {

struct TickRecord {
  double t = 0.0;
  vehicle::Pose2D pose;
  std::optional<reefworld::SubstrateClass> truth;
  std::optional<reefworld::SubstrateClass> predicted;
  bool released = false;
  double gauge = 0.0;
  double battery = 0.0;
  std::size_t waypoint = 0;
  std::optional<double> cross_track;  // against the active leg, when there is one
};

struct VehicleSimConfig {
  vehicle::VehicleParams vehicle;
  guidance::GuidanceParams guidance;
  DispersalSpec dispersal;
};

/// One simulated vehicle over a shared map. Each tick makes at most one
/// substrate decision at the current position, then integrates the
/// dynamics for dt.
class VehicleSim {
 public:
  VehicleSim(std::uint32_t id, std::shared_ptr<const reefworld::BenthicMap> map, VehicleSimConfig config,
             std::unique_ptr<perception::SubstrateClassifier> classifier, vehicle::Pose2D start);

  std::uint32_t id() const { return id_; }
  const vehicle::VehicleState& state() const { return state_; }
  const dispersal::Bladder& bladder() const { return bladder_; }
  dispersal::DispersalMode mode() const { return mode_; }
  const std::optional<guidance::Mission>& mission() const { return mission_; }
  std::size_t waypoint_index() const { return active_index_; }
  bool running() const { return running_; }
  bool mission_complete() const { return complete_; }
  std::optional<double> bladder_exhausted_at() const { return exhausted_at_; }
  const std::vector<dispersal::DispersalEvent>& events() const { return events_; }
  const std::optional<dispersal::DispersalEvent>& last_event() const { return last_event_; }
  vehicle::Pose2D home() const { return home_; }

  void upload_mission(guidance::Mission mission);
  /// Throws InvalidState while underway.
  void set_payload(const vehicle::PayloadConfig& payload);
  void set_mode(dispersal::DispersalMode mode) { mode_ = mode; }
  /// Throws InvalidState without a mission.
  void start();
  void stop() { running_ = false; }
  void return_home();

  TickRecord tick(double dt, Vec2 wind);

 private:
  std::uint32_t id_;
  std::shared_ptr<const reefworld::BenthicMap> map_;
  VehicleSimConfig config_;
  std::unique_ptr<perception::SubstrateClassifier> classifier_;
  vehicle::VehicleState state_;
  dispersal::Bladder bladder_;
  dispersal::DispersalMode mode_;
  vehicle::Pose2D home_;
  std::optional<guidance::Mission> mission_;
  std::size_t active_index_ = 0;
  bool running_ = false;
  bool complete_ = false;
  std::optional<double> exhausted_at_;
  std::vector<dispersal::DispersalEvent> events_;
  std::optional<dispersal::DispersalEvent> last_event_;
};

enum class Termination { MissionComplete, BatteryDepleted, DurationLimit, Watchdog };
std::string_view to_string(Termination t);

/// Time spent on a leg before its cross-track error counts as steady state.
inline constexpr double kSettleTime = 30.0;

struct CrossTrackStats {
  double max_abs = 0.0;         // every tick on a leg
  double max_abs_steady = 0.0;  // ticks at least kSettleTime into a leg
  std::size_t samples = 0;
};

struct RunResult {
  Scenario scenario;
  reefworld::GridGeometry grid;
  dispersal::EventLog log;
  metrics::MetricsReport report;
  std::vector<TickRecord> trajectory;
  Termination termination = Termination::MissionComplete;
  double sim_time = 0.0;
  std::optional<double> bladder_exhausted_at;
  double final_bladder_l = 0.0;
  double initial_bladder_l = 0.0;
  CrossTrackStats cross_track;
  double coverage_ratio = 0.0;  // surveyed area / manual baseline
};

/// Steps the scenario until the mission completes, the battery dies, the
/// duration limit passes or the watchdog (watchdog_factor x planned path
/// length / cruise speed) trips. Throws Configuration for an invalid
/// scenario and EmptyLog when no decisions were made. A watchdog stop is
/// reported through `termination`, with the partial outputs intact.
RunResult run_scenario(const Scenario& scenario);

/// Same as run_scenario with a different classifier behind the gate.
RunResult run_scenario(const Scenario& scenario, std::unique_ptr<perception::SubstrateClassifier> classifier);

struct ModeComparison {
  RunResult gated;
  RunResult constant;
  double wasted_delta = 0.0;  // constant minus gated, percentage points
};

/// Runs the scenario under both dispersal modes with identical seeds.
ModeComparison compare_modes(const Scenario& scenario);

/// Writes events.ndjson, report.json, report.txt and trajectory.csv.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);
void write_trajectory_csv(std::ostream& out, const std::vector<TickRecord>& trajectory);

}  // namespace reefsim::sim
