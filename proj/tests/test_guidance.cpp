#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "reefsim/guidance.hpp"

using namespace reefsim;
using namespace reefsim::guidance;
using vehicle::VehicleState;

namespace {

// |u x (p - a)| / |u| written out by hand.
double cte_oracle(Vec2 p, Vec2 a, Vec2 b) {
  const double ux = b.x - a.x, uy = b.y - a.y;
  return (ux * (p.y - a.y) - uy * (p.x - a.x)) / std::sqrt(ux * ux + uy * uy);
}

struct Track {
  double steady_max = 0.0;
  double time_to_settle = -1.0;
  bool complete = false;
};

// Straight transect along +x from (0,0) to (len,0), start offset laterally.
Track closed_loop(double offset, double heading, Vec2 wind, double len = 200.0, double settle = 60.0) {
  Mission m;
  m.waypoints = {{0.0, 0.0}, {len, 0.0}};
  VehicleState s;
  s.pose = {0.0, offset, heading};
  std::size_t idx = 1;
  const double dt = 0.5;
  Track out;
  const PathSegment seg(m.waypoints[0], m.waypoints[1]);
  while (s.time < 4.0 * len / 0.75) {
    const auto f = follow_path(s, m, idx, {});
    idx = f.active_index;
    if (f.complete) {
      out.complete = true;
      break;
    }
    s = vehicle::step_dynamics(s, f.command, wind, dt);
    const double e = std::fabs(cross_track_error(s.pose, seg));
    if (s.time >= settle) out.steady_max = std::max(out.steady_max, e);
    if (e >= 0.5) out.time_to_settle = -1.0;
    else if (out.time_to_settle < 0.0) out.time_to_settle = s.time;
  }
  return out;
}

}  // namespace

TEST_CASE("cross_track_error") {
  const PathSegment x_axis({0.0, 0.0}, {10.0, 0.0});
  CHECK(cross_track_error(Vec2{4.0, 0.0}, x_axis) == 0.0);
  CHECK(cross_track_error(Vec2{5.0, 2.0}, x_axis) == doctest::Approx(2.0));
  const PathSegment diag({0.0, 0.0}, {3.0, 4.0});
  CHECK(cross_track_error(Vec2{3.0, 0.0}, diag) == doctest::Approx(-2.4));
  CHECK(std::fabs(cross_track_error(Vec2{3.0, 0.0}, diag)) == doctest::Approx(std::fabs(3.0 * 4.0 - 0.0 * 3.0) / 5.0));
  CHECK_THROWS_AS(PathSegment({1.0, 1.0}, {1.0, 1.0}), Error);
}

TEST_CASE("cross_track_error oracle, antisymmetry and batch path") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back({u(rng), u(rng)});
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const PathSegment seg(a, b);
    const auto batch = cross_track_errors(pts, seg);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double e = cross_track_error(pts[i], seg);
      REQUIRE(e == doctest::Approx(cte_oracle(pts[i], a, b)).epsilon(1e-9));
      REQUIRE(cross_track_error(pts[i], seg.reversed()) == doctest::Approx(-e).epsilon(1e-9));
      REQUIRE(batch[i] == doctest::Approx(e).epsilon(1e-12));
    }
  }
}

TEST_CASE("follow_path command signs") {
  Mission m;
  m.waypoints = {{0.0, 0.0}, {50.0, 0.0}};
  VehicleState s;
  s.pose = {10.0, 0.0, 0.0};
  auto f = follow_path(s, m, 1);
  CHECK(f.command.left() == f.command.right());
  CHECK(f.command.left() > 0.0);
  CHECK_FALSE(f.complete);

  s.pose = {10.0, 1.0, 0.0};  // left of the line
  f = follow_path(s, m, 1);
  CHECK(f.command.left() > f.command.right());

  s.pose = {10.0, -1.0, 0.0};
  f = follow_path(s, m, 1);
  CHECK(f.command.right() > f.command.left());

  SUBCASE("reversed drive steers on the stern heading") {
    VehicleState r = vehicle::configure_payload(VehicleState{}, vehicle::Collection{});
    r.pose = {10.0, 0.0, std::numbers::pi};  // stern points along +x
    const auto g = follow_path(r, m, 1);
    CHECK(g.command.left() == g.command.right());
    const auto next = vehicle::step_dynamics(r, g.command, {}, 1.0);
    CHECK(next.pose.x > r.pose.x);
  }
}

TEST_CASE("follow_path waypoint sequencing") {
  Mission m;
  m.waypoints = {{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}};
  VehicleState s;
  s.pose = {0.3, 0.2, 0.0};
  CHECK(follow_path(s, m, 0).active_index == 1);
  s.pose = {10.5, 3.0, 0.0};  // past the end of leg 1
  CHECK(follow_path(s, m, 1).active_index == 2);
  s.pose = {10.0, 9.5, 0.0};
  CHECK(follow_path(s, m, 2).complete);
  CHECK_THROWS_AS(follow_path(s, m, 7), Error);
  CHECK_THROWS_AS(follow_path(s, Mission{}, 0), Error);
}

TEST_CASE("closed loop from a 2 m offset settles within 60 s") {
  const auto t = closed_loop(2.0, 0.0, {});
  CHECK(t.time_to_settle >= 0.0);
  CHECK(t.time_to_settle <= 60.0);
  CHECK(t.steady_max < 0.5);
  CHECK(t.complete);
}

TEST_CASE("closed loop steady state for offsets up to 5 m, calm and crosswind") {
  for (double off = -5.0; off <= 5.0; off += 0.5) {
    for (double hdg : {0.0, 0.6, -0.6, 1.5}) {
      for (Vec2 wind : {Vec2{0.0, 0.0}, Vec2{0.0, 0.2}, Vec2{0.0, -0.2}}) {
        CAPTURE(off);
        CAPTURE(hdg);
        CAPTURE(wind.y);
        const auto t = closed_loop(off, hdg, wind, 60.0, 30.0);
        CHECK(t.steady_max < 0.5);
        CHECK(t.complete);
      }
    }
  }
}

TEST_CASE("plan_coverage") {
  SUBCASE("20x10 with 2 m tracks") {
    const auto m = plan_coverage({{0.0, 0.0}, {20.0, 10.0}}, 2.0);
    REQUIRE(m.waypoints.size() == 10u);
    CHECK(m.mode == MissionMode::Coverage);
    const auto t = coverage_transects(m);
    REQUIRE(t.size() == 5u);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(t[i].start().y == doctest::Approx(1.0 + 2.0 * static_cast<double>(i)));
      CHECK(t[i].start().y == t[i].end().y);
      // serpentine
      const bool fwd = i % 2 == 0;
      CHECK((t[i].end().x > t[i].start().x) == fwd);
      if (i > 0) CHECK(std::fabs(t[i].start().x - t[i - 1].end().x) < 1e-12);
    }
    CHECK(max_coverage_gap({{0.0, 0.0}, {20.0, 10.0}}, t, 0.1) <= 1.0 + 1e-9);
  }
  SUBCASE("degenerate width gives one midline transect") {
    const auto m = plan_coverage({{0.0, 0.0}, {20.0, 1.0}}, 5.0);
    REQUIRE(m.waypoints.size() == 2u);
    CHECK(m.waypoints[0] == Vec2{0.0, 0.5});
    CHECK(m.waypoints[1] == Vec2{20.0, 0.5});
  }
  SUBCASE("transects follow the long side") {
    const auto m = plan_coverage({{0.0, 0.0}, {4.0, 30.0}}, 1.0);
    const auto t = coverage_transects(m);
    CHECK(t.size() == 4u);
    for (const auto& s : t) CHECK(s.start().x == s.end().x);
  }
  SUBCASE("lead-in extends transects past the region") {
    const auto m = plan_coverage({{0.0, 0.0}, {20.0, 4.0}}, 1.0, 3.0);
    CHECK(m.waypoints.front().x == -3.0);
    CHECK(m.waypoints[1].x == 23.0);
  }
  SUBCASE("overlap formula") {
    CHECK(track_width_for_overlap(3.0, 0.3) == doctest::Approx(2.1));
    const auto m = plan_coverage({{0.0, 0.0}, {30.0, 12.0}}, track_width_for_overlap(3.0, 0.3));
    const auto t = coverage_transects(m);
    for (std::size_t i = 1; i < t.size(); ++i)
      CHECK(std::fabs(t[i].start().y - t[i - 1].start().y) <= 3.0 * (1.0 - 0.3) + 1e-9);
    CHECK_THROWS_AS(track_width_for_overlap(3.0, 1.0), Error);
  }
  CHECK_THROWS_AS(plan_coverage({{0.0, 0.0}, {0.0, 10.0}}, 1.0), Error);
  CHECK_THROWS_AS(plan_coverage({{0.0, 0.0}, {5.0, 10.0}}, 0.0), Error);
}

TEST_CASE("coverage completeness by brute-force rasterization") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> side(1.0, 40.0), tw(0.3, 6.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Rect r{{-5.0, 2.0}, {-5.0 + side(rng), 2.0 + side(rng)}};
    const double w = tw(rng);
    const auto transects = coverage_transects(plan_coverage(r, w));
    // independent scalar rasterization at 0.1 m
    double worst = 0.0;
    for (double y = r.min.y; y <= r.max.y + 1e-9; y += 0.1)
      for (double x = r.min.x; x <= r.max.x + 1e-9; x += 0.1) {
        double best = 1e300;
        for (const auto& t : transects) best = std::min(best, std::fabs(cte_oracle({x, y}, t.start(), t.end())));
        worst = std::max(worst, best);
      }
    CAPTURE(w);
    CHECK(worst <= w / 2.0 + 1e-9);
    CHECK(max_coverage_gap(r, transects, 0.1) <= w / 2.0 + 1e-9);
  }
}

TEST_CASE("formation_offsets") {
  CHECK(formation_offsets({FormationShape::Line, 5.0, 1}) == std::vector<FormationOffset>{{0.0, 0.0}});
  CHECK(formation_offsets({FormationShape::Vee, 5.0, 1}) == std::vector<FormationOffset>{{0.0, 0.0}});
  const auto line = formation_offsets({FormationShape::Line, 5.0, 3});
  REQUIRE(line.size() == 3u);
  CHECK(line[0].lateral == -5.0);
  CHECK(line[1].lateral == 0.0);
  CHECK(line[2].lateral == 5.0);
  for (const auto& o : line) CHECK(o.longitudinal == 0.0);

  const auto vee = formation_offsets({FormationShape::Vee, 2.0, 5});
  REQUIRE(vee.size() == 5u);
  for (const auto& o : vee) CHECK(std::fabs(o.lateral) == doctest::Approx(-o.longitudinal));

  try {
    formation_offsets({FormationShape::Line, 5.0, 8});
    FAIL("expected FleetSize");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FleetSize);
  }
  CHECK_THROWS_AS(formation_offsets({FormationShape::Line, 0.0, 3}), Error);
  CHECK_THROWS_AS(formation_offsets({FormationShape::Vee, 1.0, 0}), Error);
}

TEST_CASE("formation symmetry for every shape and count") {
  for (auto shape : {FormationShape::Line, FormationShape::Vee})
    for (int n = 1; n <= 7; ++n) {
      const auto offs = formation_offsets({shape, 3.5, n});
      REQUIRE(offs.size() == static_cast<std::size_t>(n));
      double sum = 0.0;
      for (const auto& o : offs) sum += o.lateral;
      CHECK(sum == doctest::Approx(0.0));
      // distinct slots
      for (std::size_t i = 0; i < offs.size(); ++i)
        for (std::size_t j = i + 1; j < offs.size(); ++j) CHECK_FALSE(offs[i] == offs[j]);
    }
}

TEST_CASE("translate_mission and path_length") {
  Mission m;
  m.waypoints = {{0.0, 0.0}, {0.0, 100.0}};
  const auto t = translate_mission(m, {5.0, 0.0});
  // left of a +y heading is -x
  CHECK(t.waypoints[0] == Vec2{-5.0, 0.0});
  CHECK(t.waypoints[1] == Vec2{-5.0, 100.0});
  CHECK(path_length({0.0, -10.0}, m) == doctest::Approx(110.0));
  CHECK(path_length({0.0, 0.0}, m) == doctest::Approx(100.0));
}

TEST_CASE("missions from random poses finish inside the watchdog") {
  std::mt19937_64 rng(31);
  const Rect region{{0.0, 0.0}, {20.0, 8.0}};
  const auto mission = plan_coverage(region, 2.0, 4.0);
  std::uniform_real_distribution<double> ux(-90.0, 110.0), uy(-36.0, 44.0), uh(-3.1, 3.1);
  for (int trial = 0; trial < 20; ++trial) {
    VehicleState s;
    s.pose = {ux(rng), uy(rng), uh(rng)};
    const double limit = 2.0 * path_length(s.pose.position(), mission) / 0.75;
    std::size_t idx = 0;
    bool done = false;
    while (s.time < limit) {
      const auto f = follow_path(s, mission, idx);
      idx = f.active_index;
      if (f.complete) {
        done = true;
        break;
      }
      s = vehicle::step_dynamics(s, f.command, {}, 0.5);
    }
    CAPTURE(s.pose.x);
    CAPTURE(s.pose.y);
    CHECK(done);
  }
}
