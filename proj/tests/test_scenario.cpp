#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "reefsim/sim/runner.hpp"

using namespace reefsim;
using namespace reefsim::sim;

namespace {

std::string preset(const std::string& name) { return std::string(REEFSIM_SCENARIO_DIR) + "/" + name + ".json"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("reefsim_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

Scenario small(std::uint64_t seed = 1) {
  Scenario s;
  s.seed = seed;
  s.map.width_cells = 30;
  s.map.height_cells = 6;
  s.map.suitable_fraction = 0.5;
  s.start = {-4.0, 0.5, 0.0};
  s.mission.coverage_region = Rect{{0.0, 0.0}, {30.0, 6.0}};
  s.mission.track_width = 1.0;
  s.mission.lead_in = 5.0;
  s.classifier.model = "LoomisFieldModel";
  s.dispersal.flow_rate_lps = 0.02;
  return s;
}

std::string problems_of(const std::string& json) {
  try {
    parse_scenario(json);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Configuration);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets parse and validate") {
  for (const char* name : {"loomis-gated", "loomis-constant", "watson-gated", "watson-constant", "loomis-coverage"}) {
    CAPTURE(name);
    const auto s = load_scenario(preset(name));
    CHECK(validate_scenario(s).empty());
    CHECK(s.name == name);
  }
  const auto loomis = load_scenario(preset("loomis-gated"));
  CHECK(loomis.map.suitable_fraction == 0.4685);
  CHECK(*loomis.classifier.model == "LoomisFieldModel");
  CHECK(loomis.dispersal.mode == dispersal::DispersalMode::ClassifierGated);
  CHECK(load_scenario(preset("watson-constant")).dispersal.mode == dispersal::DispersalMode::ConstantPump);
}

TEST_CASE("parse errors carry field paths and are all reported") {
  const auto msg = problems_of(R"({"tick_rate_hz": 0.5, "map": {"widht_cells": 3, "cell_size": "big"},
                                   "mission": {"waypoints": [[0, 0], [1]]}, "classifier": {"recall_suitable": 1.5}})");
  CHECK(msg.find("tick_rate_hz") != std::string::npos);
  CHECK(msg.find("map.widht_cells: unknown field") != std::string::npos);
  CHECK(msg.find("map.cell_size: must be a number") != std::string::npos);
  CHECK(msg.find("mission.waypoints") != std::string::npos);
  CHECK(msg.find("classifier.recall_suitable") != std::string::npos);

  CHECK(problems_of("[1, 2]").find("<root>") != std::string::npos);
  CHECK(problems_of("{").find("not valid JSON") != std::string::npos);
  CHECK(problems_of(R"({"mission": {}})").find("exactly one of") != std::string::npos);
  CHECK(problems_of(R"({"mission": {"waypoints": [[1, 1]]}, "classifier": {"model": "Nope"}})").find("unknown model") !=
        std::string::npos);
  CHECK(problems_of(R"({"mission": {"waypoints": [[1, 1]]}, "dispersal": {"mode": "pulsed"}})").find("dispersal.mode") !=
        std::string::npos);
  CHECK(problems_of(R"({"seed": -4, "mission": {"waypoints": [[1, 1]]}})").find("seed") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("scenario json round trip") {
  Scenario s = small(17);
  s.wind = reefworld::WindField({0.0, 0.1}, 0.05, 30.0);
  s.map.seed = 5;
  const auto text = scenario_to_json(s);
  const auto back = parse_scenario(text);
  CHECK(scenario_to_json(back) == text);
  CHECK(back.seed == 17u);
  CHECK(*back.map.seed == 5u);
  CHECK(back.wind.velocity == Vec2{0.0, 0.1});
}

TEST_CASE("map file scenarios") {
  const auto dir = temp_dir("mapfile");
  const auto map = reefworld::generate_reef(3, 30, 6, 1.0, 0.5, 0.2);
  reefworld::save_map((dir / "reef.map").string(), map);
  Scenario s = small();
  s.map.file = "reef.map";
  {
    std::ofstream out(dir / "s.json");
    out << scenario_to_json(s);
  }
  const auto loaded = load_scenario((dir / "s.json").string());
  CHECK(build_map(loaded) == map);
  const auto r = run_scenario(loaded);
  CHECK(r.grid.width_cells == 30u);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_scenario terminations") {
  SUBCASE("mission completes and covers the region") {
    const auto r = run_scenario(small());
    CHECK(r.termination == Termination::MissionComplete);
    CHECK(r.report.area_covered_m2 == 180.0);
    CHECK(r.report.decision_events > 180u);
    CHECK(r.cross_track.max_abs_steady < 0.5);
    CHECK(r.coverage_ratio == doctest::Approx(180.0 / 50.0));
  }
  SUBCASE("zero duration is an empty log") {
    Scenario s = small();
    s.duration_limit_s = 0.0;
    try {
      run_scenario(s);
      FAIL("expected EmptyLog");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyLog);
    }
  }
  SUBCASE("duration limit") {
    Scenario s = small();
    s.duration_limit_s = 40.0;
    const auto r = run_scenario(s);
    CHECK(r.termination == Termination::DurationLimit);
    CHECK(r.sim_time == doctest::Approx(40.0));
  }
  SUBCASE("battery") {
    Scenario s = small();
    s.vehicle.endurance_s = 60.0;
    const auto r = run_scenario(s);
    CHECK(r.termination == Termination::BatteryDepleted);
  }
  SUBCASE("watchdog keeps partial output") {
    Scenario s = small();
    s.watchdog_factor = 0.2;
    const auto r = run_scenario(s);
    CHECK(r.termination == Termination::Watchdog);
    CHECK_FALSE(r.log.events.empty());
  }
  SUBCASE("invalid scenario") {
    Scenario s = small();
    s.tick_rate_hz = 0.0;
    CHECK_THROWS_AS(run_scenario(s), Error);
  }
}

TEST_CASE("bladder exhaustion is flagged and the run continues") {
  Scenario s = small();
  s.dispersal.mode = dispersal::DispersalMode::ConstantPump;
  s.vehicle.bladder_capacity_l = 1.0;
  const auto r = run_scenario(s);
  REQUIRE(r.bladder_exhausted_at.has_value());
  CHECK(r.termination == Termination::MissionComplete);
  CHECK(r.final_bladder_l == 0.0);
  CHECK(r.report.released_volume_l == doctest::Approx(1.0));

  Scenario g = s;
  g.dispersal.mode = dispersal::DispersalMode::ClassifierGated;
  const auto rg = run_scenario(g);
  CHECK(rg.report.exhausted_missed_pct > 0.0);
  CHECK(rg.report.exhausted_missed_pct <= rg.report.missed_event_pct);
}

TEST_CASE("write_outputs and replay from disk") {
  const auto dir = temp_dir("outputs");
  const auto r = run_scenario(small(4));
  write_outputs(r, dir);
  for (const char* f : {"events.ndjson", "report.json", "report.txt", "trajectory.csv", "overlay.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream in(dir / "events.ndjson");
  const auto log = dispersal::read_event_log(in);
  const auto again = metrics::compute_report(log.events, log.mode, log.grid);
  CHECK(again.suitable_pct == r.report.suitable_pct);
  CHECK(again.missed_event_pct == r.report.missed_event_pct);
  CHECK(slurp(dir / "report.txt").find("On-board model") != std::string::npos);
  CHECK(slurp(dir / "trajectory.csv").rfind("t,x,y,heading,truth,decision", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("compare_modes") {
  SUBCASE("all-suitable map wastes nothing either way") {
    Scenario s = small();
    s.map.suitable_fraction = 1.0;
    const auto c = compare_modes(s);
    CHECK(c.wasted_delta == doctest::Approx(0.0));
  }
  SUBCASE("Loomis and Watson presets") {
    const auto loomis = compare_modes(load_scenario(preset("loomis-gated")));
    const auto watson = compare_modes(load_scenario(preset("watson-gated")));
    CHECK(loomis.wasted_delta == doctest::Approx(53.06).epsilon(0.01));
    CHECK(watson.wasted_delta == doctest::Approx(9.49).epsilon(0.03));
    CHECK(loomis.wasted_delta > watson.wasted_delta);
    CHECK(loomis.gated.trajectory.size() == loomis.constant.trajectory.size());
  }
}

TEST_CASE("VehicleSim state machine") {
  auto map = std::make_shared<const reefworld::BenthicMap>(reefworld::generate_reef(1, 20, 20, 1.0, 0.5, 0.3));
  VehicleSim v(0, map, {}, std::make_unique<perception::FixedClassifier>(reefworld::SubstrateClass::Suitable),
               {1.0, 1.0, 0.0});
  CHECK_THROWS_AS(v.start(), Error);
  guidance::Mission m;
  m.waypoints = {{10.0, 1.0}};
  v.upload_mission(m);
  // Monitoring payload by default: no decisions
  v.start();
  for (int i = 0; i < 4; ++i) v.tick(0.5, {});
  CHECK(v.events().empty());
  CHECK_THROWS_AS(v.set_payload(vehicle::Dispersal{}), Error);
  v.stop();
  for (int i = 0; i < 4; ++i) v.tick(0.5, {});
  v.set_payload(vehicle::Dispersal{50.0});
  CHECK(v.bladder().volume_l() == 50.0);
  v.start();
  while (!v.mission_complete() && v.state().time < 100.0) v.tick(0.5, {});
  CHECK(v.mission_complete());
  CHECK_FALSE(v.events().empty());
  CHECK(v.last_event()->frame_id == v.events().size() - 1);
  v.return_home();
  while (!v.mission_complete() && v.state().time < 200.0) v.tick(0.5, {});
  CHECK(norm(v.state().pose.position() - Vec2{1.0, 1.0}) < 1.0);
}
