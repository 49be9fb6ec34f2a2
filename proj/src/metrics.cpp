#include "reefsim/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace reefsim::metrics {

using reefworld::SubstrateClass;

namespace {

std::size_t cell_of(const DispersalEvent& e, const reefworld::GridGeometry& grid) {
  const auto idx = grid.cell_index(e.position);
  if (!idx) {
    std::ostringstream msg;
    msg << "event at (" << e.position.x << ", " << e.position.y << ") lies outside the map grid";
    throw Error(Errc::DataIntegrity, msg.str());
  }
  return *idx;
}

// Cell index -> position of the last event in that cell.
std::unordered_map<std::size_t, std::size_t> last_event_per_cell(std::span<const DispersalEvent> events,
                                                                 const reefworld::GridGeometry& grid) {
  std::unordered_map<std::size_t, std::size_t> last;
  last.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) last[cell_of(events[i], grid)] = i;
  return last;
}

}  // namespace

MetricsReport compute_report(std::span<const DispersalEvent> events, DispersalMode mode,
                             const reefworld::GridGeometry& grid) {
  if (events.empty()) throw Error(Errc::EmptyLog, "no dispersal events to report on");

  MetricsReport r;
  r.mode = mode;
  r.decision_events = events.size();
  for (const auto& e : events) {
    if (!(e.cell_area > 0.0)) throw Error(Errc::DataIntegrity, "event without a positive cell area");
    r.released_volume_l += e.released_volume_l;
    r.released_larvae += e.released_larvae;
  }

  double suitable = 0.0, unsuitable = 0.0, missed = 0.0, wasted = 0.0, exhausted = 0.0;
  const auto last = last_event_per_cell(events, grid);
  for (const auto& [cell, index] : last) {
    const DispersalEvent& e = events[index];
    const bool truth_suitable = e.ground_truth == SubstrateClass::Suitable;
    if (truth_suitable && e.released())
      suitable += e.cell_area;
    else if (truth_suitable) {
      missed += e.cell_area;
      if (e.bladder_empty) exhausted += e.cell_area;
    } else if (e.released())
      wasted += e.cell_area;
    else
      unsuitable += e.cell_area;
  }
  const double area = suitable + unsuitable + missed + wasted;
  const auto pct = [area](double a) { return 100.0 * a / area; };

  r.surveyed_cells = last.size();
  r.area_covered_m2 = area;
  r.suitable_pct = pct(suitable);
  r.unsuitable_pct = pct(unsuitable);
  r.missed_event_pct = pct(missed);
  r.wasted_larvae_pct = pct(wasted);
  r.exhausted_missed_pct = pct(exhausted);
  r.ground_truth_suitable_pct = pct(suitable + missed);
  return r;
}

double coverage_ratio(double asv_area, double manual_area) {
  if (!(manual_area > 0.0)) throw Error(Errc::InvalidParameter, "manual area must be positive");
  return asv_area / manual_area;
}

double coverage_area(std::span<const DispersalEvent> events, const reefworld::GridGeometry& grid) {
  double area = 0.0;
  for (const auto& [cell, index] : last_event_per_cell(events, grid)) area += events[index].cell_area;
  return area;
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  const auto optional_pct = [](std::optional<double> v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["mode"] = dispersal::to_string(r.mode);
  j["suitable_pct"] = r.suitable_pct;
  j["unsuitable_pct"] = optional_pct(r.unsuitable());
  j["missed_event_pct"] = optional_pct(r.missed());
  j["wasted_larvae_pct"] = r.wasted_larvae_pct;
  j["ground_truth_suitable_pct"] = r.ground_truth_suitable_pct;
  j["exhausted_missed_pct"] = r.exhausted_missed_pct;
  j["area_covered_m2"] = r.area_covered_m2;
  j["surveyed_cells"] = r.surveyed_cells;
  j["decision_events"] = r.decision_events;
  j["released_volume_l"] = r.released_volume_l;
  j["released_larvae"] = r.released_larvae;
  return j.dump(2);
}

namespace {

std::string cell(std::optional<double> v) {
  if (!v) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

void row(std::ostringstream& out, const std::string& label, const std::string& a, const std::string& b,
         const std::string& c, const std::string& d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %14s %14s %10s %10s\n", label.c_str(), a.c_str(), b.c_str(),
                c.c_str(), d.c_str());
  out << buf;
}

}  // namespace

std::string format_table(const std::string& title, std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << title << "\n";
  row(out, "", "Suitable", "Unsuitable", "Missed", "Wasted");
  row(out, "", "Substrate (%)", "Substrate (%)", "Event (%)", "Larvae (%)");
  if (!reports.empty()) {
    const double gt = reports.front().ground_truth_suitable_pct;
    row(out, "Ground truth", cell(gt), cell(100.0 - gt), "N/A", "N/A");
  }
  for (const auto& r : reports) {
    const std::string label = r.mode == DispersalMode::ConstantPump ? "Constant pump" : "On-board model";
    row(out, label, cell(r.suitable_pct), cell(r.unsuitable()), cell(r.missed()), cell(r.wasted_larvae_pct));
  }
  return out.str();
}

void write_overlay_csv(std::ostream& out, std::span<const DispersalEvent> events) {
  out << "x,y,decision,truth\n";
  char buf[128];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%s,%s\n", e.position.x, e.position.y,
                  reefworld::to_string(e.predicted).data(), reefworld::to_string(e.ground_truth).data());
    out << buf;
  }
}

}  // namespace reefsim::metrics
