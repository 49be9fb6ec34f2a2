#include "reefsim/dispersal.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace reefsim::dispersal {

using json = nlohmann::ordered_json;

std::string_view to_string(DispersalMode m) {
  return m == DispersalMode::ClassifierGated ? "gated" : "constant";
}

DispersalMode dispersal_mode_from_string(std::string_view s) {
  if (s == "gated") return DispersalMode::ClassifierGated;
  if (s == "constant") return DispersalMode::ConstantPump;
  throw Error(Errc::Configuration, "unknown dispersal mode '" + std::string(s) + "'");
}

void PumpState::validate() const {
  if (!(flow_rate_lps >= 0.0)) throw Error(Errc::InvalidParameter, "flow_rate must be >= 0");
  if (!(larvae_density_per_l >= 0.0)) throw Error(Errc::InvalidParameter, "larvae_density must be >= 0");
}

namespace {
std::int64_t to_microliters(double liters) {
  return static_cast<std::int64_t>(std::llround(liters * 1e6));
}
}  // namespace

Bladder::Bladder(double capacity_l) : Bladder(capacity_l, capacity_l) {}

Bladder::Bladder(double capacity_l, double volume_l)
    : capacity_ul_(to_microliters(capacity_l)), volume_ul_(to_microliters(volume_l)) {
  if (!(capacity_l > 0.0) || capacity_ul_ <= 0)
    throw Error(Errc::InvalidParameter, "bladder capacity must be positive");
  if (!(volume_l >= 0.0) || volume_ul_ > capacity_ul_)
    throw Error(Errc::InvalidParameter, "bladder volume must be within [0, capacity]");
}

std::int64_t Bladder::draw(std::int64_t ul) {
  const std::int64_t taken = std::clamp<std::int64_t>(ul, 0, volume_ul_);
  volume_ul_ -= taken;
  return taken;
}

GateDecision gate_decision(DispersalMode mode, const perception::Prediction& prediction,
                           const Bladder& bladder) {
  if (bladder.empty()) return {false, true};
  if (mode == DispersalMode::ConstantPump) return {true, false};
  return {prediction.predicted == SubstrateClass::Suitable, false};
}

ReleaseResult release_step(const Bladder& bladder, const PumpState& pump, double dt,
                           double swath_width, double speed) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  if (!(swath_width > 0.0)) throw Error(Errc::InvalidParameter, "swath_width must be positive");
  pump.validate();

  ReleaseResult result{bladder};
  if (!pump.running) {
    result.empty_alert = bladder.empty();
    return result;
  }

  double flow = pump.flow_rate_lps;
  if (pump.larvae_density_per_l > 0.0) {
    const double max_flow = kMaxLarvaeDensity * swath_width * std::fabs(speed) / pump.larvae_density_per_l;
    if (flow > max_flow) {
      flow = max_flow;
      result.flow_capped = true;
    }
  }
  // Rounded down so the released larvae never overshoot the density cap.
  const auto demand_ul = static_cast<std::int64_t>(std::floor(flow * dt * 1e6));
  const std::int64_t released_ul = result.bladder.draw(demand_ul);

  result.released_volume_l = static_cast<double>(released_ul) * 1e-6;
  result.released_larvae = result.released_volume_l * pump.larvae_density_per_l;
  result.empty_alert = demand_ul > released_ul || result.bladder.empty();
  return result;
}

GaugeReading fuel_gauge(const Bladder& bladder, double low_threshold) {
  const double fraction =
      static_cast<double>(bladder.volume_ul()) / static_cast<double>(bladder.capacity_ul());
  return {fraction, bladder.empty() || fraction < low_threshold};
}

// --- event log ------------------------------------------------------------

namespace {

json event_to_json(const DispersalEvent& e) {
  json j;
  j["vehicle"] = e.vehicle;
  j["frame"] = e.frame_id;
  j["t"] = e.timestamp;
  j["x"] = e.position.x;
  j["y"] = e.position.y;
  j["truth"] = reefworld::to_string(e.ground_truth);
  j["predicted"] = reefworld::to_string(e.predicted);
  j["volume_l"] = e.released_volume_l;
  j["larvae"] = e.released_larvae;
  j["cell_area"] = e.cell_area;
  j["bladder_empty"] = e.bladder_empty;
  return j;
}

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key))
    throw Error(Errc::DataIntegrity, "line " + std::to_string(line) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::DataIntegrity, "line " + std::to_string(line) + ": bad field '" + key + "'");
  }
}

DispersalEvent event_from_json(const json& j, std::size_t line) {
  DispersalEvent e;
  e.vehicle = required<std::uint32_t>(j, "vehicle", line);
  e.frame_id = required<std::uint64_t>(j, "frame", line);
  e.timestamp = required<double>(j, "t", line);
  e.position = {required<double>(j, "x", line), required<double>(j, "y", line)};
  try {
    e.ground_truth = reefworld::substrate_from_string(required<std::string>(j, "truth", line));
    e.predicted = reefworld::substrate_from_string(required<std::string>(j, "predicted", line));
  } catch (const Error& err) {
    if (err.code() == Errc::DataIntegrity) throw;
    throw Error(Errc::DataIntegrity, "line " + std::to_string(line) + ": " + err.what());
  }
  e.released_volume_l = required<double>(j, "volume_l", line);
  e.released_larvae = required<double>(j, "larvae", line);
  e.cell_area = required<double>(j, "cell_area", line);
  e.bladder_empty = required<bool>(j, "bladder_empty", line);
  return e;
}

}  // namespace

std::string event_to_json_line(const DispersalEvent& event) { return event_to_json(event).dump(); }

void write_event_log(std::ostream& out, const EventLog& log) {
  json header;
  header["schema"] = "reefsim.dispersal_events";
  header["version"] = kEventLogVersion;
  header["mode"] = to_string(log.mode);
  header["grid"] = {{"width_cells", log.grid.width_cells},
                    {"height_cells", log.grid.height_cells},
                    {"cell_size", log.grid.cell_size},
                    {"origin_x", log.grid.origin.x},
                    {"origin_y", log.grid.origin.y}};
  out << header.dump() << '\n';
  for (const auto& e : log.events) out << event_to_json(e).dump() << '\n';
}

EventLog read_event_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyLog, "event log is empty");
  EventLog log;
  try {
    const json header = json::parse(line);
    if (header.value("schema", "") != "reefsim.dispersal_events")
      throw Error(Errc::DataIntegrity, "not a dispersal event log");
    if (header.value("version", 0) != kEventLogVersion)
      throw Error(Errc::DataIntegrity, "unsupported event log version");
    log.mode = dispersal_mode_from_string(header.at("mode").get<std::string>());
    const json& g = header.at("grid");
    log.grid.width_cells = g.at("width_cells").get<std::size_t>();
    log.grid.height_cells = g.at("height_cells").get<std::size_t>();
    log.grid.cell_size = g.at("cell_size").get<double>();
    log.grid.origin = {g.at("origin_x").get<double>(), g.at("origin_y").get<double>()};
  } catch (const json::exception& e) {
    throw Error(Errc::DataIntegrity, std::string("bad event log header: ") + e.what());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error(Errc::DataIntegrity, "line " + std::to_string(lineno) + ": not valid JSON");
    }
    log.events.push_back(event_from_json(j, lineno));
  }
  return log;
}

}  // namespace reefsim::dispersal
