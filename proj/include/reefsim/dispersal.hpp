#pragma once
// Pump gating, bladder accounting and the dispersal event log.

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "reefsim/perception.hpp"
#include "reefsim/reefworld.hpp"

namespace reefsim::dispersal {

using reefworld::SubstrateClass;

/// Areal release limit, larvae per square meter.
inline constexpr double kMaxLarvaeDensity = 10000.0;

enum class DispersalMode { ClassifierGated, ConstantPump };

std::string_view to_string(DispersalMode m);
DispersalMode dispersal_mode_from_string(std::string_view s);

struct PumpState {
  bool running = false;
  double flow_rate_lps = 0.1;
  double larvae_density_per_l = 1.0e4;

  void validate() const;
};

/// Larval bladder. Volume is held in whole microliters so that released
/// volumes plus the remainder always add back to the initial fill exactly.
class Bladder {
 public:
  explicit Bladder(double capacity_l);
  Bladder(double capacity_l, double volume_l);

  double capacity_l() const { return static_cast<double>(capacity_ul_) * 1e-6; }
  double volume_l() const { return static_cast<double>(volume_ul_) * 1e-6; }
  std::int64_t capacity_ul() const { return capacity_ul_; }
  std::int64_t volume_ul() const { return volume_ul_; }
  bool empty() const { return volume_ul_ == 0; }

  /// Removes up to `ul` microliters and returns the amount removed.
  std::int64_t draw(std::int64_t ul);

 private:
  std::int64_t capacity_ul_;
  std::int64_t volume_ul_;
};

struct GateDecision {
  bool pump_on = false;
  bool low_larvae_alert = false;
};

/// Gated: on iff predicted Suitable and the bladder is not empty.
/// Constant: on iff the bladder is not empty.
GateDecision gate_decision(DispersalMode mode, const perception::Prediction& prediction,
                           const Bladder& bladder);

struct ReleaseResult {
  Bladder bladder;
  double released_volume_l = 0.0;
  double released_larvae = 0.0;
  bool flow_capped = false;
  bool empty_alert = false;
};

/// Releases min(flow * dt, volume), with the flow first capped so the
/// larvae spread over swath_width * |speed| * dt stay within
/// kMaxLarvaeDensity.
ReleaseResult release_step(const Bladder& bladder, const PumpState& pump, double dt,
                           double swath_width, double speed);

struct GaugeReading {
  double fraction = 0.0;
  bool low_larvae_alert = false;
};

GaugeReading fuel_gauge(const Bladder& bladder, double low_threshold = 0.05);

struct DispersalEvent {
  std::uint32_t vehicle = 0;
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  Vec2 position;
  SubstrateClass ground_truth = SubstrateClass::Unsuitable;
  SubstrateClass predicted = SubstrateClass::Unsuitable;
  double released_volume_l = 0.0;
  double released_larvae = 0.0;
  double cell_area = 1.0;
  bool bladder_empty = false;

  bool released() const { return released_volume_l > 0.0; }
  friend bool operator==(const DispersalEvent&, const DispersalEvent&) = default;
};

struct EventLog {
  reefworld::GridGeometry grid;
  DispersalMode mode = DispersalMode::ClassifierGated;
  std::vector<DispersalEvent> events;
};

inline constexpr int kEventLogVersion = 1;

// Newline-delimited JSON. The first record is a header
//   {"schema":"reefsim.dispersal_events","version":1,"mode":...,"grid":{...}}
// and every following line is one event.
void write_event_log(std::ostream& out, const EventLog& log);
std::string event_to_json_line(const DispersalEvent& event);
EventLog read_event_log(std::istream& in);

}  // namespace reefsim::dispersal
