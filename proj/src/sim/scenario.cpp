#include "reefsim/sim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace reefsim::sim {

using json = nlohmann::ordered_json;

namespace {

// Walks a JSON object, recording unknown keys and type errors by path.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail("", "must be an object");
  }
  ~Reader() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) fail(key, "unknown field");
  }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  void number(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(key, "must be a number");
    }
  }
  template <typename Int>
  void integer(const char* key, Int& out) {
    if (const json* v = get(key)) {
      if (v->is_number_unsigned()) out = v->get<Int>();
      else fail(key, "must be a non-negative integer");
    }
  }
  void integer(const char* key, int& out) {
    if (const json* v = get(key)) {
      if (v->is_number_integer()) out = v->get<int>();
      else fail(key, "must be an integer");
    }
  }
  void text(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(key, "must be a string");
    }
  }
  void vec2(const char* key, Vec2& out) {
    if (const json* v = get(key)) {
      if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number())
        out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      else fail(key, "must be [x, y]");
    }
  }
  void object(const char* key, const std::function<void(Reader&)>& body) {
    if (const json* v = get(key)) {
      Reader child(*v, join(key), errors_);
      if (v->is_object()) body(child);
    }
  }
  const json* get(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }
  void fail(const std::string& key, const std::string& msg) { errors_.push_back(join(key) + ": " + msg); }
  std::string join(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_scenario(Reader& r, Scenario& s) {
  r.text("name", s.name);
  r.integer("seed", s.seed);
  r.number("tick_rate_hz", s.tick_rate_hz);
  r.number("duration_limit_s", s.duration_limit_s);
  r.number("watchdog_factor", s.watchdog_factor);
  r.number("manual_area_m2", s.manual_area_m2);
  r.object("map", [&](Reader& m) {
    std::string file;
    m.text("file", file);
    if (!file.empty()) s.map.file = file;
    m.integer("width_cells", s.map.width_cells);
    m.integer("height_cells", s.map.height_cells);
    m.number("cell_size", s.map.cell_size);
    m.number("suitable_fraction", s.map.suitable_fraction);
    m.number("clustering", s.map.clustering);
    m.vec2("origin", s.map.origin);
    std::uint64_t seed = 0;
    if (m.get("seed")) {
      m.integer("seed", seed);
      s.map.seed = seed;
    }
  });
  r.object("vehicle", [&](Reader& v) {
    v.number("cruise_speed_max", s.vehicle.cruise_speed_max);
    v.number("omega_max", s.vehicle.omega_max);
    v.number("endurance_s", s.vehicle.endurance_s);
    v.number("bladder_capacity_l", s.vehicle.bladder_capacity_l);
    v.object("start", [&](Reader& p) {
      p.number("x", s.start.x);
      p.number("y", s.start.y);
      p.number("heading", s.start.heading);
    });
  });
  r.object("guidance", [&](Reader& g) {
    g.number("lookahead", s.guidance.lookahead);
    g.number("cross_track_gain", s.guidance.cross_track_gain);
    g.number("heading_gain", s.guidance.heading_gain);
  });
  r.object("mission", [&](Reader& m) {
    m.object("coverage", [&](Reader& c) {
      Rect region{};
      if (const json* v = c.get("region")) {
        if (v->is_array() && v->size() == 4 && std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); }))
          region = {{(*v)[0].get<double>(), (*v)[1].get<double>()}, {(*v)[2].get<double>(), (*v)[3].get<double>()}};
        else
          c.fail("region", "must be [x0, y0, x1, y1]");
      } else {
        c.fail("region", "is required");
      }
      s.mission.coverage_region = region;
      c.number("track_width", s.mission.track_width);
      c.number("lead_in", s.mission.lead_in);
    });
    if (const json* w = m.get("waypoints")) {
      if (!w->is_array()) {
        m.fail("waypoints", "must be a list of [x, y]");
      } else {
        for (const json& p : *w) {
          if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number())
            s.mission.waypoints.push_back({p[0].get<double>(), p[1].get<double>()});
          else
            m.fail("waypoints", "each waypoint must be [x, y]");
        }
      }
    }
    m.number("arrival_radius", s.mission.arrival_radius);
  });
  r.object("classifier", [&](Reader& c) {
    std::string model;
    c.text("model", model);
    if (!model.empty()) s.classifier.model = model;
    c.number("recall_suitable", s.classifier.recall_suitable);
    c.number("recall_unsuitable", s.classifier.recall_unsuitable);
    c.integer("sticky_frames", s.classifier.sticky_frames);
  });
  r.object("dispersal", [&](Reader& d) {
    std::string mode;
    d.text("mode", mode);
    if (!mode.empty()) {
      if (mode == "gated" || mode == "constant") s.dispersal.mode = dispersal::dispersal_mode_from_string(mode);
      else d.fail("mode", "must be 'gated' or 'constant'");
    }
    d.number("flow_rate_lps", s.dispersal.flow_rate_lps);
    d.number("larvae_density_per_l", s.dispersal.larvae_density_per_l);
    d.number("swath_width", s.dispersal.swath_width);
  });
  r.object("wind", [&](Reader& w) {
    w.vec2("velocity", s.wind.velocity);
    w.number("gust_amplitude", s.wind.gust_amplitude);
    w.number("gust_period", s.wind.gust_period);
  });
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  const auto check = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) errors.push_back(field + ": " + msg);
  };
  check(s.tick_rate_hz >= 1.0, "tick_rate_hz", "must be >= 1 (integration step at most 1 s)");
  check(s.duration_limit_s >= 0.0, "duration_limit_s", "must be >= 0");
  check(s.watchdog_factor > 0.0, "watchdog_factor", "must be positive");
  check(s.manual_area_m2 > 0.0, "manual_area_m2", "must be positive");
  if (!s.map.file) {
    check(s.map.width_cells >= 1, "map.width_cells", "must be >= 1");
    check(s.map.height_cells >= 1, "map.height_cells", "must be >= 1");
    check(s.map.cell_size > 0.0, "map.cell_size", "must be positive");
    check(s.map.suitable_fraction >= 0.0 && s.map.suitable_fraction <= 1.0, "map.suitable_fraction",
          "must be in [0, 1]");
    check(s.map.clustering >= 0.0 && s.map.clustering <= 1.0, "map.clustering", "must be in [0, 1]");
  }
  check(s.vehicle.cruise_speed_max > 0.0, "vehicle.cruise_speed_max", "must be positive");
  check(s.vehicle.omega_max > 0.0, "vehicle.omega_max", "must be positive");
  check(s.vehicle.endurance_s > 0.0, "vehicle.endurance_s", "must be positive");
  check(s.vehicle.bladder_capacity_l > 0.0, "vehicle.bladder_capacity_l", "must be positive");
  check(s.guidance.lookahead > 0.0, "guidance.lookahead", "must be positive");
  check(s.guidance.cross_track_gain >= 0.0, "guidance.cross_track_gain", "must be >= 0");
  check(s.guidance.heading_gain > 0.0, "guidance.heading_gain", "must be positive");
  const bool has_region = s.mission.coverage_region.has_value();
  check(has_region != !s.mission.waypoints.empty(), "mission",
        "exactly one of 'coverage' or 'waypoints' is required");
  if (has_region) {
    const Rect& r = *s.mission.coverage_region;
    check(r.width() > 0.0 && r.height() > 0.0, "mission.coverage.region", "must have positive extent");
    check(s.mission.track_width > 0.0, "mission.coverage.track_width", "must be positive");
    check(s.mission.lead_in >= 0.0, "mission.coverage.lead_in", "must be >= 0");
  }
  check(s.mission.arrival_radius > 0.0, "mission.arrival_radius", "must be positive");
  if (s.classifier.model) {
    try {
      perception::named_model_from_string(*s.classifier.model);
    } catch (const Error&) {
      errors.push_back("classifier.model: unknown model '" + *s.classifier.model + "'");
    }
  } else {
    check(s.classifier.recall_suitable >= 0.0 && s.classifier.recall_suitable <= 1.0,
          "classifier.recall_suitable", "must be in [0, 1]");
    check(s.classifier.recall_unsuitable >= 0.0 && s.classifier.recall_unsuitable <= 1.0,
          "classifier.recall_unsuitable", "must be in [0, 1]");
  }
  check(s.classifier.sticky_frames >= 0, "classifier.sticky_frames", "must be >= 0");
  check(s.dispersal.flow_rate_lps >= 0.0, "dispersal.flow_rate_lps", "must be >= 0");
  check(s.dispersal.larvae_density_per_l >= 0.0, "dispersal.larvae_density_per_l", "must be >= 0");
  check(s.dispersal.swath_width > 0.0, "dispersal.swath_width", "must be positive");
  check(s.wind.gust_amplitude >= 0.0, "wind.gust_amplitude", "must be >= 0");
  check(s.wind.gust_period > 0.0, "wind.gust_period", "must be positive");
  return errors;
}

namespace {
[[noreturn]] void throw_problems(const std::vector<std::string>& problems) {
  std::ostringstream msg;
  msg << "invalid scenario:";
  for (const auto& p : problems) msg << "\n  " << p;
  throw Error(Errc::Configuration, msg.str());
}
}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(Errc::Configuration, std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario s;
  std::vector<std::string> problems;
  {
    Reader r(j, "", problems);
    if (j.is_object()) read_scenario(r, s);
  }
  if (j.is_object())
    for (auto& p : validate_scenario(s)) problems.push_back(std::move(p));
  if (!problems.empty()) throw_problems(problems);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (s.map.file && std::filesystem::path(*s.map.file).is_relative())
    s.map.file = (std::filesystem::path(path).parent_path() / *s.map.file).string();
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["tick_rate_hz"] = s.tick_rate_hz;
  j["duration_limit_s"] = s.duration_limit_s;
  j["watchdog_factor"] = s.watchdog_factor;
  j["manual_area_m2"] = s.manual_area_m2;
  json map;
  if (s.map.file) map["file"] = *s.map.file;
  map["width_cells"] = s.map.width_cells;
  map["height_cells"] = s.map.height_cells;
  map["cell_size"] = s.map.cell_size;
  map["suitable_fraction"] = s.map.suitable_fraction;
  map["clustering"] = s.map.clustering;
  map["origin"] = {s.map.origin.x, s.map.origin.y};
  if (s.map.seed) map["seed"] = *s.map.seed;
  j["map"] = map;
  j["vehicle"] = {{"cruise_speed_max", s.vehicle.cruise_speed_max},
                  {"omega_max", s.vehicle.omega_max},
                  {"endurance_s", s.vehicle.endurance_s},
                  {"bladder_capacity_l", s.vehicle.bladder_capacity_l},
                  {"start", {{"x", s.start.x}, {"y", s.start.y}, {"heading", s.start.heading}}}};
  j["guidance"] = {{"lookahead", s.guidance.lookahead},
                   {"cross_track_gain", s.guidance.cross_track_gain},
                   {"heading_gain", s.guidance.heading_gain}};
  json mission;
  if (s.mission.coverage_region) {
    const Rect& r = *s.mission.coverage_region;
    mission["coverage"] = {{"region", {r.min.x, r.min.y, r.max.x, r.max.y}},
                           {"track_width", s.mission.track_width},
                           {"lead_in", s.mission.lead_in}};
  } else {
    json wps = json::array();
    for (const Vec2 w : s.mission.waypoints) wps.push_back({w.x, w.y});
    mission["waypoints"] = wps;
  }
  mission["arrival_radius"] = s.mission.arrival_radius;
  j["mission"] = mission;
  json classifier;
  if (s.classifier.model) {
    classifier["model"] = *s.classifier.model;
  } else {
    classifier["recall_suitable"] = s.classifier.recall_suitable;
    classifier["recall_unsuitable"] = s.classifier.recall_unsuitable;
  }
  classifier["sticky_frames"] = s.classifier.sticky_frames;
  j["classifier"] = classifier;
  j["dispersal"] = {{"mode", dispersal::to_string(s.dispersal.mode)},
                    {"flow_rate_lps", s.dispersal.flow_rate_lps},
                    {"larvae_density_per_l", s.dispersal.larvae_density_per_l},
                    {"swath_width", s.dispersal.swath_width}};
  j["wind"] = {{"velocity", {s.wind.velocity.x, s.wind.velocity.y}},
               {"gust_amplitude", s.wind.gust_amplitude},
               {"gust_period", s.wind.gust_period}};
  return j.dump(2);
}

std::uint64_t classifier_seed(std::uint64_t scenario_seed) {
  // splitmix64 finalizer
  std::uint64_t z = scenario_seed + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

perception::ClassifierModel classifier_model(const Scenario& s) {
  perception::ClassifierModel model;
  if (s.classifier.model)
    model = perception::calibrate_model(*s.classifier.model, classifier_seed(s.seed));
  else
    model = {s.classifier.recall_suitable, s.classifier.recall_unsuitable, classifier_seed(s.seed), 0};
  model.sticky_frames = s.classifier.sticky_frames;
  return model;
}

reefworld::BenthicMap build_map(const Scenario& s) {
  if (s.map.file) return reefworld::load_map(*s.map.file);
  return reefworld::generate_reef(s.map.seed.value_or(s.seed), s.map.width_cells, s.map.height_cells,
                                  s.map.cell_size, s.map.suitable_fraction, s.map.clustering, s.map.origin);
}

guidance::Mission build_mission(const Scenario& s) {
  guidance::Mission m;
  if (s.mission.coverage_region)
    m = guidance::plan_coverage(*s.mission.coverage_region, s.mission.track_width, s.mission.lead_in);
  else
    m.waypoints = s.mission.waypoints;
  m.arrival_radius = s.mission.arrival_radius;
  m.validate();
  return m;
}

}  // namespace reefsim::sim
