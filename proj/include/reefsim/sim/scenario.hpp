#pragma once
// Scenario description and its JSON file format.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reefsim/dispersal.hpp"
#include "reefsim/guidance.hpp"
#include "reefsim/perception.hpp"
#include "reefsim/reefworld.hpp"
#include "reefsim/vehicle.hpp"

namespace reefsim::sim {

struct MapSpec {
  std::optional<std::string> file;  // load instead of generating
  std::size_t width_cells = 80;
  std::size_t height_cells = 40;
  double cell_size = 1.0;
  double suitable_fraction = 0.5;
  double clustering = 0.3;
  Vec2 origin;
  std::optional<std::uint64_t> seed;  // defaults to the scenario seed
};

struct MissionSpec {
  // Either a coverage region or an explicit waypoint list.
  std::optional<Rect> coverage_region;
  double track_width = 1.0;
  double lead_in = 0.0;
  std::vector<Vec2> waypoints;
  double arrival_radius = 1.0;
};

struct ClassifierSpec {
  std::optional<std::string> model;  // LoomisFieldModel, WatsonFieldModel, CombinedTestModel
  double recall_suitable = 1.0;
  double recall_unsuitable = 1.0;
  int sticky_frames = 0;
};

struct DispersalSpec {
  dispersal::DispersalMode mode = dispersal::DispersalMode::ClassifierGated;
  double flow_rate_lps = 0.1;
  double larvae_density_per_l = 1.0e4;
  double swath_width = 1.0;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double tick_rate_hz = 2.0;
  double duration_limit_s = 7200.0;
  double watchdog_factor = 2.0;
  double manual_area_m2 = 50.0;  // baseline for the coverage ratio
  MapSpec map;
  vehicle::VehicleParams vehicle;
  vehicle::Pose2D start;
  guidance::GuidanceParams guidance;
  MissionSpec mission;
  ClassifierSpec classifier;
  DispersalSpec dispersal;
  reefworld::WindField wind;
};

/// Field-level problems, e.g. "map.width_cells: must be >= 1". Empty when
/// the scenario is runnable.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Parses scenario JSON. Unknown keys and type mismatches are reported with
/// their dotted path; throws Configuration listing every problem found.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

/// Classifier model for a scenario (named calibration or explicit recalls),
/// seeded from the scenario seed.
perception::ClassifierModel classifier_model(const Scenario& scenario);
reefworld::BenthicMap build_map(const Scenario& scenario);
guidance::Mission build_mission(const Scenario& scenario);

/// Seed for the classifier stream, decorrelated from the map seed.
std::uint64_t classifier_seed(std::uint64_t scenario_seed);

}  // namespace reefsim::sim
