#pragma once
// Waypoint following, coverage planning and formation geometry.

#include <span>
#include <vector>

#include "reefsim/common.hpp"
#include "reefsim/vehicle.hpp"

namespace reefsim::guidance {

class PathSegment {
 public:
  /// Throws InvalidParameter when start == end.
  PathSegment(Vec2 start, Vec2 end);

  Vec2 start() const { return start_; }
  Vec2 end() const { return end_; }
  Vec2 direction() const { return end_ - start_; }
  double length() const { return norm(direction()); }
  PathSegment reversed() const { return {end_, start_}; }

 private:
  Vec2 start_;
  Vec2 end_;
};

enum class MissionMode { Transect, Coverage, Station };

struct Mission {
  std::vector<Vec2> waypoints;
  double arrival_radius = 1.0;
  MissionMode mode = MissionMode::Transect;

  /// Throws InvalidParameter for an empty list or non-positive radius.
  void validate() const;
  friend bool operator==(const Mission&, const Mission&) = default;
};

enum class FormationShape { Line, Vee };

struct FormationSpec {
  FormationShape shape = FormationShape::Line;
  double spacing = 5.0;
  int count = 1;
};

/// Offset of one vehicle from the formation reference, in the frame of the
/// direction of travel: lateral is positive to the left.
struct FormationOffset {
  double lateral = 0.0;
  double longitudinal = 0.0;
  friend bool operator==(const FormationOffset&, const FormationOffset&) = default;
};

struct GuidanceParams {
  double lookahead = 2.0;      // m
  double cross_track_gain = 2.0;
  double heading_gain = 3.0;   // normalized yaw command per radian of heading error
};

/// Signed perpendicular distance to the infinite line through the segment,
/// positive when `position` is left of the direction of travel.
double cross_track_error(Vec2 position, const PathSegment& segment);
inline double cross_track_error(const vehicle::Pose2D& pose, const PathSegment& segment) {
  return cross_track_error(pose.position(), segment);
}

/// Batch form of cross_track_error over many points (SIMD dispatched).
std::vector<double> cross_track_errors(std::span<const Vec2> positions, const PathSegment& segment);

struct FollowResult {
  vehicle::ThrusterCommand command;
  std::size_t active_index = 0;
  bool complete = false;
};

/// Line-of-sight guidance toward a lookahead point on the active segment
/// (waypoint[active_index - 1] -> waypoint[active_index]; the first waypoint
/// is approached directly). The active waypoint is advanced once the vehicle
/// is inside the arrival radius or has passed the segment end.
FollowResult follow_path(const vehicle::VehicleState& state, const Mission& mission,
                         std::size_t active_index, const GuidanceParams& params = {});

/// Track width giving `overlap` sidelap between adjacent footprints.
double track_width_for_overlap(double footprint, double overlap);

/// Boustrophedon plan with transects parallel to the long side of `region`.
/// `lead_in` extends every transect past the region on both ends so turns
/// happen outside it.
Mission plan_coverage(const Rect& region, double track_width, double lead_in = 0.0);

/// Pairs of consecutive waypoints forming the transects of a coverage plan.
std::vector<PathSegment> coverage_transects(const Mission& mission);

/// Largest distance from any raster sample of `region` (at `resolution`)
/// to its nearest transect line.
double max_coverage_gap(const Rect& region, std::span<const PathSegment> transects,
                        double resolution);

/// Throws FleetSize when count is outside [1, 7].
std::vector<FormationOffset> formation_offsets(const FormationSpec& spec);

/// Mission translated rigidly by `offset`, expressed in the frame of the
/// mission's first leg (+x when it has a single waypoint).
Mission translate_mission(const Mission& mission, const FormationOffset& offset);

/// Sum of leg lengths starting from `from`.
double path_length(Vec2 from, const Mission& mission);

}  // namespace reefsim::guidance
