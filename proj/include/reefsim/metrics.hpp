#pragma once
// Area accounting of dispersal outcomes, in the layout of the field trial
// coverage table.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reefsim/dispersal.hpp"

namespace reefsim::metrics {

using dispersal::DispersalEvent;
using dispersal::DispersalMode;

/// Percentages are of the surveyed area: the distinct grid cells holding at
/// least one event, each judged by the last event recorded in it.
struct MetricsReport {
  DispersalMode mode = DispersalMode::ClassifierGated;
  double suitable_pct = 0.0;      // truth Suitable, released
  double unsuitable_pct = 0.0;    // truth Unsuitable, withheld
  double missed_event_pct = 0.0;  // truth Suitable, withheld
  double wasted_larvae_pct = 0.0; // truth Unsuitable, released
  double ground_truth_suitable_pct = 0.0;
  double exhausted_missed_pct = 0.0;  // share of missed_event_pct with an empty bladder
  double area_covered_m2 = 0.0;
  std::size_t surveyed_cells = 0;
  std::size_t decision_events = 0;
  double released_volume_l = 0.0;
  double released_larvae = 0.0;

  /// Under constant pumping the withheld categories are not applicable.
  bool withheld_applicable() const { return mode == DispersalMode::ClassifierGated; }
  std::optional<double> unsuitable() const {
    return withheld_applicable() ? std::optional(unsuitable_pct) : std::nullopt;
  }
  std::optional<double> missed() const {
    return withheld_applicable() ? std::optional(missed_event_pct) : std::nullopt;
  }
  double partition_sum() const {
    return suitable_pct + unsuitable_pct + missed_event_pct + wasted_larvae_pct;
  }
};

/// Throws EmptyLog for no events and DataIntegrity for events that fall
/// outside `grid` or carry a non-positive cell area.
MetricsReport compute_report(std::span<const DispersalEvent> events, DispersalMode mode,
                             const reefworld::GridGeometry& grid);

/// Throws InvalidParameter when manual_area <= 0.
double coverage_ratio(double asv_area, double manual_area);

/// Area of the distinct grid cells visited by events.
double coverage_area(std::span<const DispersalEvent> events, const reefworld::GridGeometry& grid);

std::string report_to_json(const MetricsReport& report);

/// Fixed-width table with a ground-truth row followed by one row per report
/// ("Constant pump" / "On-board model"), two decimals, N/A where undefined.
std::string format_table(const std::string& title, std::span<const MetricsReport> reports);

/// Per-event decision overlay: x,y,decision,truth (decision is the
/// predicted class, as drawn by the operator console).
void write_overlay_csv(std::ostream& out, std::span<const DispersalEvent> events);

}  // namespace reefsim::metrics
