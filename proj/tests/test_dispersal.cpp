#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "reefsim/dispersal.hpp"

using namespace reefsim;
using namespace reefsim::dispersal;

namespace {
perception::Prediction predicted(SubstrateClass c) { return {c, 0, 0.0}; }
}  // namespace

TEST_CASE("gate_decision") {
  const Bladder half(100.0, 50.0);
  CHECK(gate_decision(DispersalMode::ClassifierGated, predicted(SubstrateClass::Suitable), half).pump_on);
  CHECK_FALSE(gate_decision(DispersalMode::ClassifierGated, predicted(SubstrateClass::Unsuitable), half).pump_on);
  CHECK(gate_decision(DispersalMode::ConstantPump, predicted(SubstrateClass::Unsuitable), half).pump_on);
  CHECK_FALSE(gate_decision(DispersalMode::ConstantPump, predicted(SubstrateClass::Suitable), half).low_larvae_alert);

  const Bladder empty(100.0, 0.0);
  for (auto mode : {DispersalMode::ClassifierGated, DispersalMode::ConstantPump}) {
    const auto g = gate_decision(mode, predicted(SubstrateClass::Suitable), empty);
    CHECK_FALSE(g.pump_on);
    CHECK(g.low_larvae_alert);
  }
}

TEST_CASE("release_step examples") {
  const Bladder full(100.0);
  SUBCASE("pump off") {
    const auto r = release_step(full, {false, 0.1, 1e4}, 1.0, 1.0, 0.5);
    CHECK(r.released_volume_l == 0.0);
    CHECK(r.bladder.volume_ul() == full.volume_ul());
  }
  SUBCASE("areal density under the cap") {
    const auto r = release_step(full, {true, 0.1, 1e4}, 1.0, 1.0, 0.5);
    CHECK(r.released_volume_l == doctest::Approx(0.1));
    CHECK(r.released_larvae == doctest::Approx(1000.0));
    const double density = r.released_larvae / (1.0 * 0.5 * 1.0);
    CHECK(density == doctest::Approx(2000.0));
    CHECK(density <= kMaxLarvaeDensity);
    CHECK_FALSE(r.flow_capped);
    CHECK(r.bladder.volume_l() == doctest::Approx(99.9));
  }
  SUBCASE("starvation boundary") {
    const auto r = release_step(Bladder(100.0, 0.05), {true, 0.1, 1e4}, 1.0, 1.0, 0.5);
    CHECK(r.released_volume_l == doctest::Approx(0.05));
    CHECK(r.bladder.volume_l() == 0.0);
    CHECK(r.bladder.empty());
    CHECK(r.empty_alert);
  }
  SUBCASE("flow capped at the density limit") {
    const auto r = release_step(full, {true, 5.0, 1e4}, 1.0, 1.0, 0.5);
    CHECK(r.flow_capped);
    CHECK(r.released_larvae / 0.5 <= kMaxLarvaeDensity);
    CHECK(r.released_larvae / 0.5 == doctest::Approx(kMaxLarvaeDensity).epsilon(1e-5));
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(release_step(full, {true, -0.1, 1e4}, 1.0, 1.0, 0.5), Error);
    CHECK_THROWS_AS(release_step(full, {true, 0.1, -1.0}, 1.0, 1.0, 0.5), Error);
    CHECK_THROWS_AS(release_step(full, {true, 0.1, 1e4}, 0.0, 1.0, 0.5), Error);
    CHECK_THROWS_AS(release_step(full, {true, 0.1, 1e4}, 1.0, 0.0, 0.5), Error);
  }
}

TEST_CASE("fuel_gauge") {
  CHECK(fuel_gauge(Bladder(100.0)).fraction == 1.0);
  CHECK_FALSE(fuel_gauge(Bladder(100.0)).low_larvae_alert);
  CHECK(fuel_gauge(Bladder(100.0, 75.0)).fraction == 0.75);
  const auto empty = fuel_gauge(Bladder(100.0, 0.0));
  CHECK(empty.fraction == 0.0);
  CHECK(empty.low_larvae_alert);
  CHECK(fuel_gauge(Bladder(100.0, 4.0)).low_larvae_alert);
}

TEST_CASE("bladder bounds") {
  CHECK_THROWS_AS(Bladder(0.0), Error);
  CHECK_THROWS_AS(Bladder(10.0, 11.0), Error);
  CHECK_THROWS_AS(Bladder(10.0, -1.0), Error);
  Bladder b(1.0);
  CHECK(b.draw(-5) == 0);
  CHECK(b.draw(400000) == 400000);
  CHECK(b.draw(10000000) == 600000);
  CHECK(b.empty());
}

TEST_CASE("random release properties: conservation, cap, monotone volume") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> flow(0.0, 2.0), speed(0.0, 0.75), dt(0.05, 1.0), swath(0.2, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Bladder b(static_cast<double>(1 + rng() % 100));
    const auto initial = b.volume_ul();
    std::int64_t released = 0;
    double released_l = 0.0;
    for (int i = 0; i < 400; ++i) {
      const double sp = speed(rng), sw = swath(rng), step = dt(rng);
      const auto r = release_step(b, {(rng() % 4) != 0, flow(rng), 1e4}, step, sw, sp);
      REQUIRE(r.bladder.volume_ul() <= b.volume_ul());
      REQUIRE(r.bladder.volume_ul() >= 0);
      const double area = sw * sp * step;
      if (area > 0.0) REQUIRE(r.released_larvae / area <= kMaxLarvaeDensity * (1.0 + 1e-12));
      else REQUIRE(r.released_larvae == 0.0);
      released += b.volume_ul() - r.bladder.volume_ul();
      released_l += r.released_volume_l;
      b = r.bladder;
    }
    CHECK(released + b.volume_ul() == initial);
    CHECK(std::llround(released_l * 1e6) == released);
  }
}

TEST_CASE("event log round trip and errors") {
  EventLog log;
  log.grid = {12, 7, 0.5, {1.0, -2.0}};
  log.mode = DispersalMode::ConstantPump;
  std::mt19937_64 rng(4);
  for (std::uint64_t i = 0; i < 50; ++i) {
    DispersalEvent e;
    e.vehicle = static_cast<std::uint32_t>(i % 3);
    e.frame_id = i;
    e.timestamp = 0.5 * static_cast<double>(i);
    e.position = {1.0 + 0.1 * static_cast<double>(rng() % 60), -2.0 + 0.1 * static_cast<double>(rng() % 35)};
    e.ground_truth = rng() & 1 ? SubstrateClass::Suitable : SubstrateClass::Unsuitable;
    e.predicted = rng() & 1 ? SubstrateClass::Suitable : SubstrateClass::Unsuitable;
    e.released_volume_l = 0.000001 * static_cast<double>(rng() % 20000);
    e.released_larvae = e.released_volume_l * 1e4;
    e.cell_area = 0.25;
    e.bladder_empty = (rng() % 10) == 0;
    log.events.push_back(e);
  }
  std::stringstream ss;
  write_event_log(ss, log);
  const std::string text = ss.str();
  const auto back = read_event_log(ss);
  CHECK(back.mode == log.mode);
  CHECK(back.grid.width_cells == 12u);
  CHECK(back.grid.cell_size == 0.5);
  CHECK(back.grid.origin == Vec2{1.0, -2.0});
  CHECK(back.events == log.events);

  std::stringstream again;
  write_event_log(again, back);
  CHECK(again.str() == text);

  std::stringstream empty;
  try {
    read_event_log(empty);
    FAIL("expected EmptyLog");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyLog);
  }
  const auto first_line = text.substr(0, text.find('\n') + 1);
  for (const std::string bad : {"{\"vehicle\":0}\n", "not json\n",
                                "{\"vehicle\":0,\"frame\":0,\"t\":0,\"x\":0,\"y\":0,\"truth\":\"sand\","
                                "\"predicted\":\"suitable\",\"volume_l\":0,\"larvae\":0,\"cell_area\":1,"
                                "\"bladder_empty\":false}\n"}) {
    std::stringstream in(first_line + bad);
    try {
      read_event_log(in);
      FAIL("expected DataIntegrity");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DataIntegrity);
    }
  }
  std::stringstream wrong_schema("{\"schema\":\"other\"}\n");
  CHECK_THROWS_AS(read_event_log(wrong_schema), Error);
}

TEST_CASE("mode strings") {
  CHECK(dispersal_mode_from_string("gated") == DispersalMode::ClassifierGated);
  CHECK(to_string(DispersalMode::ConstantPump) == "constant");
  CHECK_THROWS_AS(dispersal_mode_from_string("pulsed"), Error);
}
