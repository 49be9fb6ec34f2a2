#include "reefsim/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reefsim/simd/kernels.hpp"

namespace reefsim::guidance {

PathSegment::PathSegment(Vec2 start, Vec2 end) : start_(start), end_(end) {
  if (start == end) throw Error(Errc::InvalidParameter, "degenerate path segment");
}

void Mission::validate() const {
  if (waypoints.empty()) throw Error(Errc::InvalidParameter, "mission has no waypoints");
  if (!(arrival_radius > 0.0)) throw Error(Errc::InvalidParameter, "arrival_radius must be positive");
}

double cross_track_error(Vec2 position, const PathSegment& segment) {
  const Vec2 u = segment.direction();
  return cross(u, position - segment.start()) / norm(u);
}

std::vector<double> cross_track_errors(std::span<const Vec2> positions, const PathSegment& segment) {
  std::vector<double> xs(positions.size()), ys(positions.size()), out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    xs[i] = positions[i].x;
    ys[i] = positions[i].y;
  }
  const Vec2 u = segment.direction();
  simd::active_kernels().signed_distance_f64(xs.data(), ys.data(), xs.size(), segment.start().x,
                                             segment.start().y, u.x, u.y, 1.0 / norm(u), out.data());
  return out;
}

namespace {

vehicle::ThrusterCommand steer(double heading_error, const GuidanceParams& params) {
  const double yaw = std::clamp(params.heading_gain * heading_error, -1.0, 1.0);
  // Turning takes priority over speed; past 90 degrees of error the vehicle
  // pivots in place.
  const double forward = std::max(0.0, std::cos(heading_error)) * (1.0 - std::fabs(yaw));
  return {forward - yaw, forward + yaw};
}

bool reached(Vec2 position, const Mission& mission, std::size_t index) {
  const Vec2 target = mission.waypoints[index];
  if (norm(target - position) < mission.arrival_radius) return true;
  if (index == 0) return false;
  const Vec2 start = mission.waypoints[index - 1];
  const Vec2 u = target - start;
  const double len = norm(u);
  if (len == 0.0) return true;
  return dot(position - start, u) / len >= len;
}

}  // namespace

FollowResult follow_path(const vehicle::VehicleState& state, const Mission& mission,
                         std::size_t active_index, const GuidanceParams& params) {
  mission.validate();
  if (active_index > mission.waypoints.size())
    throw Error(Errc::InvalidParameter, "active waypoint index out of range");

  const Vec2 position = state.pose.position();
  std::size_t index = active_index;
  while (index < mission.waypoints.size() && reached(position, mission, index)) ++index;
  if (index == mission.waypoints.size()) return {{}, index, true};

  const Vec2 target = mission.waypoints[index];
  double desired;
  const Vec2 start = index == 0 ? position : mission.waypoints[index - 1];
  if (index == 0 || start == target) {
    desired = std::atan2(target.y - position.y, target.x - position.x);
  } else {
    const PathSegment segment(start, target);
    const Vec2 u = segment.direction();
    const double path_angle = std::atan2(u.y, u.x);
    const double cte = cross_track_error(position, segment);
    desired = path_angle - std::atan2(params.cross_track_gain * cte, params.lookahead);
  }

  // In reversed drive the vehicle travels stern-first.
  const double travel_heading =
      state.drive_sign < 0 ? normalize_angle(state.pose.heading + std::numbers::pi) : state.pose.heading;
  return {steer(normalize_angle(desired - travel_heading), params), index, false};
}

double track_width_for_overlap(double footprint, double overlap) {
  if (!(footprint > 0.0)) throw Error(Errc::InvalidParameter, "footprint must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(Errc::InvalidParameter, "overlap must be in [0,1)");
  return footprint * (1.0 - overlap);
}

Mission plan_coverage(const Rect& region, double track_width, double lead_in) {
  if (!(region.width() > 0.0 && region.height() > 0.0))
    throw Error(Errc::InvalidParameter, "coverage region is degenerate");
  if (!(track_width > 0.0)) throw Error(Errc::InvalidParameter, "track_width must be positive");
  if (!(lead_in >= 0.0)) throw Error(Errc::InvalidParameter, "lead_in must be >= 0");

  // Work in (along, across) coordinates; transects run along the long side.
  const bool along_x = region.width() >= region.height();
  const double long_lo = (along_x ? region.min.x : region.min.y) - lead_in;
  const double long_hi = (along_x ? region.max.x : region.max.y) + lead_in;
  const double short_lo = along_x ? region.min.y : region.min.x;
  const double short_side = along_x ? region.height() : region.width();

  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(short_side / track_width - 1e-9)));
  std::vector<double> offsets;
  if (count == 1) {
    offsets.push_back(short_lo + short_side / 2.0);
  } else {
    const double first = short_lo + track_width / 2.0;
    const double step = (short_side - track_width) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) offsets.push_back(first + step * static_cast<double>(i));
  }

  Mission mission;
  mission.mode = MissionMode::Coverage;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const bool forward = i % 2 == 0;
    const double a = forward ? long_lo : long_hi;
    const double b = forward ? long_hi : long_lo;
    const auto point = [&](double along) {
      return along_x ? Vec2{along, offsets[i]} : Vec2{offsets[i], along};
    };
    mission.waypoints.push_back(point(a));
    mission.waypoints.push_back(point(b));
  }
  return mission;
}

std::vector<PathSegment> coverage_transects(const Mission& mission) {
  std::vector<PathSegment> out;
  for (std::size_t i = 0; i + 1 < mission.waypoints.size(); i += 2)
    out.emplace_back(mission.waypoints[i], mission.waypoints[i + 1]);
  return out;
}

double max_coverage_gap(const Rect& region, std::span<const PathSegment> transects, double resolution) {
  if (!(resolution > 0.0)) throw Error(Errc::InvalidParameter, "resolution must be positive");
  if (transects.empty()) return std::numeric_limits<double>::infinity();

  const auto nx = static_cast<std::size_t>(std::floor(region.width() / resolution + 1e-9)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor(region.height() / resolution + 1e-9)) + 1;
  const auto& kernels = simd::active_kernels();

  std::vector<double> xs(nx), ys(nx), nearest(nx), dist(nx);
  double worst = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = std::min(region.min.y + resolution * static_cast<double>(j), region.max.y);
    for (std::size_t i = 0; i < nx; ++i) {
      xs[i] = std::min(region.min.x + resolution * static_cast<double>(i), region.max.x);
      ys[i] = y;
    }
    std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
    for (const auto& t : transects) {
      const Vec2 u = t.direction();
      kernels.signed_distance_f64(xs.data(), ys.data(), nx, t.start().x, t.start().y, u.x, u.y,
                                  1.0 / norm(u), dist.data());
      for (std::size_t i = 0; i < nx; ++i) nearest[i] = std::min(nearest[i], std::fabs(dist[i]));
    }
    worst = std::max(worst, kernels.max_abs_f64(nearest.data(), nx));
  }
  return worst;
}

std::vector<FormationOffset> formation_offsets(const FormationSpec& spec) {
  if (spec.count < 1 || spec.count > kMaxFleetSize)
    throw Error(Errc::FleetSize, "formation count must be between 1 and 7");
  if (!(spec.spacing > 0.0)) throw Error(Errc::InvalidParameter, "formation spacing must be positive");

  const int n = spec.count;
  const double s = spec.spacing;
  std::vector<FormationOffset> out;
  if (spec.shape == FormationShape::Line) {
    for (int i = 0; i < n; ++i) out.push_back({(i - (n - 1) / 2.0) * s, 0.0});
    return out;
  }
  // Vee with 45 degree wings. Odd counts put the leader at the apex; even
  // counts have a leading pair straddling it.
  if (n % 2 == 1) {
    out.push_back({0.0, 0.0});
    for (int k = 1; k <= n / 2; ++k) {
      out.push_back({k * s, -k * s});
      out.push_back({-k * s, -k * s});
    }
  } else {
    for (int k = 1; k <= n / 2; ++k) {
      out.push_back({(k - 0.5) * s, -(k - 1) * s});
      out.push_back({-(k - 0.5) * s, -(k - 1) * s});
    }
  }
  return out;
}

Mission translate_mission(const Mission& mission, const FormationOffset& offset) {
  mission.validate();
  Vec2 along{1.0, 0.0};
  for (std::size_t i = 1; i < mission.waypoints.size(); ++i) {
    const Vec2 d = mission.waypoints[i] - mission.waypoints[0];
    if (norm(d) > 0.0) {
      along = (1.0 / norm(d)) * d;
      break;
    }
  }
  const Vec2 left{-along.y, along.x};
  const Vec2 shift = offset.lateral * left + offset.longitudinal * along;

  Mission out = mission;
  for (auto& wp : out.waypoints) wp += shift;
  return out;
}

double path_length(Vec2 from, const Mission& mission) {
  double total = 0.0;
  Vec2 prev = from;
  for (const Vec2 wp : mission.waypoints) {
    total += norm(wp - prev);
    prev = wp;
  }
  return total;
}

}  // namespace reefsim::guidance
