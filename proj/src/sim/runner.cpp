#include "reefsim/sim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace reefsim::sim {

using reefworld::SubstrateClass;

VehicleSim::VehicleSim(std::uint32_t id, std::shared_ptr<const reefworld::BenthicMap> map, VehicleSimConfig config,
                       std::unique_ptr<perception::SubstrateClassifier> classifier, vehicle::Pose2D start)
    : id_(id),
      map_(std::move(map)),
      config_(config),
      classifier_(std::move(classifier)),
      bladder_(config.vehicle.bladder_capacity_l, 0.0),
      mode_(config.dispersal.mode),
      home_(start) {
  if (!map_ || !classifier_) throw Error(Errc::InvalidParameter, "vehicle sim needs a map and a classifier");
  state_.pose = start;
  state_.pose.heading = normalize_angle(start.heading);
}

void VehicleSim::upload_mission(guidance::Mission mission) {
  mission.validate();
  mission_ = std::move(mission);
  active_index_ = 0;
  complete_ = false;
}

void VehicleSim::set_payload(const vehicle::PayloadConfig& payload) {
  if (running_ && !complete_) throw Error(Errc::InvalidState, "stop the vehicle before changing payload");
  state_ = vehicle::configure_payload(state_, payload);
  if (const auto* d = std::get_if<vehicle::Dispersal>(&payload))
    bladder_ = dispersal::Bladder(d->bladder_capacity_l);
  else
    bladder_ = dispersal::Bladder(config_.vehicle.bladder_capacity_l, 0.0);
  exhausted_at_.reset();
}

void VehicleSim::start() {
  if (!mission_) throw Error(Errc::InvalidState, "no mission uploaded");
  running_ = true;
}

void VehicleSim::return_home() {
  guidance::Mission home;
  home.waypoints = {home_.position()};
  home.mode = guidance::MissionMode::Station;
  if (mission_) home.arrival_radius = mission_->arrival_radius;
  upload_mission(std::move(home));
  running_ = true;
}

TickRecord VehicleSim::tick(double dt, Vec2 wind) {
  TickRecord rec;
  rec.t = state_.time;
  rec.pose = state_.pose;

  const bool underway = running_ && !complete_ && !state_.dead();
  if (underway && std::holds_alternative<vehicle::Dispersal>(state_.payload)) {
    if (const auto cell = map_->grid().cell_index(state_.pose.position())) {
      const SubstrateClass truth = map_->cells()[*cell];
      const perception::Prediction prediction = classifier_->classify(truth, rec.t);
      const auto gate = dispersal::gate_decision(mode_, prediction, bladder_);
      const dispersal::PumpState pump{gate.pump_on, config_.dispersal.flow_rate_lps,
                                      config_.dispersal.larvae_density_per_l};
      const auto release =
          dispersal::release_step(bladder_, pump, dt, config_.dispersal.swath_width, state_.speed);
      bladder_ = release.bladder;
      if (bladder_.empty() && !exhausted_at_) exhausted_at_ = rec.t;

      dispersal::DispersalEvent event;
      event.vehicle = id_;
      event.frame_id = prediction.frame_id;
      event.timestamp = rec.t;
      event.position = state_.pose.position();
      event.ground_truth = truth;
      event.predicted = prediction.predicted;
      event.released_volume_l = release.released_volume_l;
      event.released_larvae = release.released_larvae;
      event.cell_area = map_->grid().cell_area();
      event.bladder_empty = gate.low_larvae_alert;
      events_.push_back(event);
      last_event_ = event;

      rec.truth = truth;
      rec.predicted = prediction.predicted;
      rec.released = event.released();
    }
  }
  state_.bladder_volume_l = bladder_.volume_l();

  vehicle::ThrusterCommand command;
  if (underway && mission_) {
    const auto follow = guidance::follow_path(state_, *mission_, active_index_, config_.guidance);
    active_index_ = follow.active_index;
    complete_ = follow.complete;
    command = follow.command;
    if (!complete_ && active_index_ > 0) {
      const Vec2 a = mission_->waypoints[active_index_ - 1];
      const Vec2 b = mission_->waypoints[active_index_];
      if (!(a == b)) rec.cross_track = guidance::cross_track_error(state_.pose, guidance::PathSegment(a, b));
    }
  }
  rec.waypoint = active_index_;
  rec.gauge = std::holds_alternative<vehicle::Dispersal>(state_.payload) ? dispersal::fuel_gauge(bladder_).fraction : 0.0;
  rec.battery = state_.battery_remaining;

  state_ = vehicle::step_dynamics(state_, command, wind, dt, config_.vehicle);
  state_.bladder_volume_l = bladder_.volume_l();
  return rec;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::MissionComplete: return "mission-complete";
    case Termination::BatteryDepleted: return "battery-depleted";
    case Termination::DurationLimit: return "duration-limit";
    case Termination::Watchdog: return "watchdog";
  }
  return "unknown";
}

namespace {

CrossTrackStats cross_track_stats(const std::vector<TickRecord>& trajectory) {
  CrossTrackStats stats;
  std::size_t leg = static_cast<std::size_t>(-1);
  double leg_start = 0.0;
  for (const auto& rec : trajectory) {
    if (rec.waypoint != leg) {
      leg = rec.waypoint;
      leg_start = rec.t;
    }
    if (!rec.cross_track) continue;
    const double e = std::fabs(*rec.cross_track);
    ++stats.samples;
    stats.max_abs = std::max(stats.max_abs, e);
    if (rec.t - leg_start >= kSettleTime) stats.max_abs_steady = std::max(stats.max_abs_steady, e);
  }
  return stats;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
  if (const auto problems = validate_scenario(scenario); !problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(Errc::Configuration, msg);
  }
  return run_scenario(scenario, std::make_unique<perception::EmulatedClassifier>(classifier_model(scenario)));
}

RunResult run_scenario(const Scenario& scenario, std::unique_ptr<perception::SubstrateClassifier> classifier) {
  if (const auto problems = validate_scenario(scenario); !problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(Errc::Configuration, msg);
  }
  auto map = std::make_shared<const reefworld::BenthicMap>(build_map(scenario));
  const guidance::Mission mission = build_mission(scenario);

  VehicleSim sim(0, map, {scenario.vehicle, scenario.guidance, scenario.dispersal}, std::move(classifier),
                 scenario.start);
  sim.set_payload(vehicle::Dispersal{scenario.vehicle.bladder_capacity_l});
  sim.set_mode(scenario.dispersal.mode);
  sim.upload_mission(mission);
  sim.start();

  RunResult result;
  result.scenario = scenario;
  result.grid = map->grid();
  result.initial_bladder_l = sim.bladder().volume_l();

  const double dt = 1.0 / scenario.tick_rate_hz;
  const double watchdog = scenario.watchdog_factor *
                          guidance::path_length(scenario.start.position(), mission) /
                          scenario.vehicle.cruise_speed_max;
  const auto max_ticks = static_cast<std::size_t>(std::floor(scenario.duration_limit_s / dt + 1e-9));

  result.termination = Termination::DurationLimit;
  for (std::size_t k = 0; k < max_ticks; ++k) {
    if (sim.mission_complete()) {
      result.termination = Termination::MissionComplete;
      break;
    }
    if (sim.state().dead()) {
      result.termination = Termination::BatteryDepleted;
      break;
    }
    if (sim.state().time >= watchdog) {
      result.termination = Termination::Watchdog;
      break;
    }
    result.trajectory.push_back(sim.tick(dt, reefworld::wind_drift(scenario.wind, sim.state().time)));
  }
  if (sim.mission_complete()) result.termination = Termination::MissionComplete;

  result.sim_time = sim.state().time;
  result.bladder_exhausted_at = sim.bladder_exhausted_at();
  result.final_bladder_l = sim.bladder().volume_l();
  result.log = {map->grid(), scenario.dispersal.mode, sim.events()};
  result.cross_track = cross_track_stats(result.trajectory);
  result.report = metrics::compute_report(result.log.events, scenario.dispersal.mode, map->grid());
  result.coverage_ratio = metrics::coverage_ratio(result.report.area_covered_m2, scenario.manual_area_m2);
  return result;
}

ModeComparison compare_modes(const Scenario& scenario) {
  Scenario gated = scenario;
  gated.dispersal.mode = dispersal::DispersalMode::ClassifierGated;
  Scenario constant = scenario;
  constant.dispersal.mode = dispersal::DispersalMode::ConstantPump;
  ModeComparison out{run_scenario(gated), run_scenario(constant), 0.0};
  out.wasted_delta = out.constant.report.wasted_larvae_pct - out.gated.report.wasted_larvae_pct;
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TickRecord>& trajectory) {
  out << "t,x,y,heading,truth,decision,released,gauge,battery,waypoint,cross_track\n";
  char buf[256];
  for (const auto& r : trajectory) {
    const char* truth = r.truth ? reefworld::to_string(*r.truth).data() : "";
    const char* decision = r.predicted ? reefworld::to_string(*r.predicted).data() : "";
    char cte[32] = "";
    if (r.cross_track) std::snprintf(cte, sizeof cte, "%.4f", *r.cross_track);
    std::snprintf(buf, sizeof buf, "%.2f,%.4f,%.4f,%.5f,%s,%s,%d,%.6f,%.6f,%zu,%s\n", r.t, r.pose.x, r.pose.y,
                  r.pose.heading, truth, decision, r.released ? 1 : 0, r.gauge, r.battery, r.waypoint, cte);
    out << buf;
  }
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(Errc::Io, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("events.ndjson");
    dispersal::write_event_log(f, result.log);
  }
  {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(metrics::report_to_json(result.report));
    j["scenario"] = result.scenario.name;
    j["seed"] = result.scenario.seed;
    j["termination"] = to_string(result.termination);
    j["sim_time_s"] = result.sim_time;
    j["coverage_ratio"] = result.coverage_ratio;
    j["bladder_exhausted_at_s"] =
        result.bladder_exhausted_at ? nlohmann::ordered_json(*result.bladder_exhausted_at) : nlohmann::ordered_json(nullptr);
    j["max_abs_cross_track_m"] = result.cross_track.max_abs;
    j["max_abs_cross_track_steady_m"] = result.cross_track.max_abs_steady;
    auto f = open("report.json");
    f << j.dump(2) << '\n';
  }
  {
    auto f = open("report.txt");
    const metrics::MetricsReport reports[] = {result.report};
    f << metrics::format_table(result.scenario.name, reports);
  }
  {
    auto f = open("trajectory.csv");
    write_trajectory_csv(f, result.trajectory);
  }
  {
    auto f = open("overlay.csv");
    metrics::write_overlay_csv(f, result.log.events);
  }
}

}  // namespace reefsim::sim
