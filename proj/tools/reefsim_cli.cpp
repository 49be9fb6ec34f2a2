// reefsim: scenario runner and fleet service front end.
//
//   reefsim run scenarios/loomis-gated.json --out out/loomis
//   reefsim compare scenarios/watson-gated.json
//   reefsim fleet --vehicles 3 --port 7077 --http-port 8077
//   reefsim report out/loomis/events.ndjson
//   reefsim validate scenarios/loomis-gated.json

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "reefsim/fleetlink/server.hpp"
#include "reefsim/guidance.hpp"
#include "reefsim/metrics.hpp"
#include "reefsim/sim/runner.hpp"

namespace {

using namespace reefsim;

volatile std::sig_atomic_t g_interrupted = 0;

struct RunOptions {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tick_rate;
};

sim::Scenario load_with_overrides(const RunOptions& o) {
  sim::Scenario s = sim::load_scenario(o.scenario);
  if (o.seed) s.seed = *o.seed;
  if (o.tick_rate) s.tick_rate_hz = *o.tick_rate;
  if (const auto problems = sim::validate_scenario(s); !problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(Errc::Configuration, msg);
  }
  return s;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out,-o", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--tick-rate", o.tick_rate, "Override the tick rate (Hz)");
}

int cmd_run(const RunOptions& o) {
  const sim::Scenario s = load_with_overrides(o);
  const auto result = sim::run_scenario(s);
  const metrics::MetricsReport reports[] = {result.report};
  std::cout << metrics::format_table(s.name + " (seed " + std::to_string(s.seed) + ")", reports);
  std::printf("termination: %s after %.1f s, %zu decisions, area %.1f m^2, coverage ratio %.2f\n",
              std::string(sim::to_string(result.termination)).c_str(), result.sim_time,
              result.report.decision_events, result.report.area_covered_m2, result.coverage_ratio);
  if (!o.out_dir.empty()) {
    sim::write_outputs(result, o.out_dir);
    std::cout << "outputs written to " << o.out_dir << "\n";
  }
  if (result.termination == sim::Termination::Watchdog) {
    std::cerr << "error: timeout: mission watchdog expired (partial outputs kept)\n";
    return 3;
  }
  return 0;
}

int cmd_compare(const RunOptions& o) {
  const sim::Scenario s = load_with_overrides(o);
  const auto cmp = sim::compare_modes(s);
  const metrics::MetricsReport reports[] = {cmp.constant.report, cmp.gated.report};
  std::cout << metrics::format_table(s.name + " (seed " + std::to_string(s.seed) + ")", reports);
  std::printf("wasted larvae delta (constant - gated): %.2f points\n", cmp.wasted_delta);
  if (!o.out_dir.empty()) {
    sim::write_outputs(cmp.gated, std::filesystem::path(o.out_dir) / "gated");
    sim::write_outputs(cmp.constant, std::filesystem::path(o.out_dir) / "constant");
  }
  return 0;
}

int cmd_report(const std::string& path, bool as_json) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  const auto log = dispersal::read_event_log(in);
  const auto report = metrics::compute_report(log.events, log.mode, log.grid);
  if (as_json) {
    std::cout << metrics::report_to_json(report) << "\n";
  } else {
    const metrics::MetricsReport reports[] = {report};
    std::cout << metrics::format_table(path, reports);
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const sim::Scenario s = sim::load_scenario(path);
  const auto map = sim::build_map(s);
  const auto mission = sim::build_mission(s);
  std::printf("%s: ok (%zux%zu map, suitable %.2f%%, %zu waypoints, path %.1f m)\n", path.c_str(),
              map.width_cells(), map.height_cells(), 100.0 * map.suitable_fraction(), mission.waypoints.size(),
              guidance::path_length(s.start.position(), mission));
  if (s.mission.coverage_region) {
    const auto transects = guidance::coverage_transects(mission);
    const double gap = guidance::max_coverage_gap(*s.mission.coverage_region, transects, 0.1);
    std::printf("coverage: %zu transects, worst gap %.3f m (limit %.3f m)\n", transects.size(), gap,
                s.mission.track_width / 2.0);
    if (gap > s.mission.track_width / 2.0 + 1e-9) {
      std::cerr << "error: coverage plan leaves gaps\n";
      return 1;
    }
  }
  return 0;
}

struct FleetOptions {
  std::string scenario;
  int vehicles = 3;
  std::uint16_t port = fleetlink::kDefaultPort;
  int http_port = 8077;
  std::string console_dir;
  double time_scale = 1.0;
  double duration = 0.0;
  std::string formation = "line";
  double spacing = 5.0;
};

int cmd_fleet(const FleetOptions& o) {
  sim::Scenario s;
  if (!o.scenario.empty()) s = sim::load_scenario(o.scenario);
  else {
    s.map.width_cells = 100;
    s.map.height_cells = 100;
    s.mission.waypoints = {{10.0, 50.0}, {90.0, 50.0}};
  }
  auto map = std::make_shared<const reefworld::BenthicMap>(sim::build_map(s));
  fleetlink::ServiceConfig cfg;
  cfg.vehicle = {s.vehicle, s.guidance, s.dispersal};
  cfg.classifier = sim::classifier_model(s);
  cfg.wind = s.wind;
  fleetlink::FleetService service(map, cfg);
  for (int i = 0; i < o.vehicles; ++i) {
    vehicle::Pose2D start = s.start;
    start.y += 2.0 * i;
    service.add_simulated_vehicle("asv-" + std::to_string(i + 1), start);
  }
  if (o.vehicles > 0) {
    guidance::FormationSpec spec{o.formation == "vee" ? guidance::FormationShape::Vee : guidance::FormationShape::Line,
                                 o.spacing, o.vehicles};
    service.dispatch(sim::build_mission(s), spec);
    for (const auto& [id, session] : service.registry().sessions()) service.handle({id, fleetlink::Start{}});
  }

  fleetlink::ServerOptions so;
  so.tcp_port = o.port;
  so.http_port = o.http_port;
  so.console_dir = o.console_dir;
  so.tick_rate_hz = s.tick_rate_hz;
  so.time_scale = o.time_scale;
  fleetlink::FleetServer server(service, so);
  server.start();
  std::printf("fleet service: %d vehicles, tcp port %u, console http port %d\n", o.vehicles, server.tcp_port(),
              server.http_port());
  std::fflush(stdout);

  std::signal(SIGINT, [](int) { g_interrupted = 1; });
  std::signal(SIGTERM, [](int) { g_interrupted = 1; });
  const auto started = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (o.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >= o.duration)
      break;
  }
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reef larvae dispersal simulator and fleet service"};
  app.require_subcommand(1);

  RunOptions run_opts, compare_opts;
  auto* run = app.add_subcommand("run", "Run a scenario and write event log, report and trajectory");
  add_run_options(run, run_opts);
  auto* compare = app.add_subcommand("compare", "Run a scenario under gated and constant-pump dispersal");
  add_run_options(compare, compare_opts);

  std::string report_path;
  bool report_json = false;
  auto* report = app.add_subcommand("report", "Recompute metrics from an event log");
  report->add_option("events", report_path, "events.ndjson file")->required()->check(CLI::ExistingFile);
  report->add_flag("--json", report_json, "Machine-readable output");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", validate_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  FleetOptions fleet_opts;
  auto* fleet = app.add_subcommand("fleet", "Serve the fleet protocol with simulated vehicles");
  fleet->add_option("--scenario", fleet_opts.scenario, "Scenario providing map, vehicle and mission")
      ->check(CLI::ExistingFile);
  fleet->add_option("--vehicles,-n", fleet_opts.vehicles, "Simulated vehicles")->check(CLI::Range(0, 7));
  fleet->add_option("--port", fleet_opts.port, "Framed protocol TCP port");
  fleet->add_option("--http-port", fleet_opts.http_port, "Console HTTP port (-1 disables)");
  fleet->add_option("--console-dir", fleet_opts.console_dir, "Static console bundle to serve");
  fleet->add_option("--time-scale", fleet_opts.time_scale, "Simulated seconds per wall second");
  fleet->add_option("--duration", fleet_opts.duration, "Stop after this many wall seconds (0 = until signal)");
  fleet->add_option("--formation", fleet_opts.formation, "line or vee")->check(CLI::IsMember({"line", "vee"}));
  fleet->add_option("--spacing", fleet_opts.spacing, "Formation spacing (m)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*compare) return cmd_compare(compare_opts);
    if (*report) return cmd_report(report_path, report_json);
    if (*validate) return cmd_validate(validate_path);
    if (*fleet) return cmd_fleet(fleet_opts);
  } catch (const reefsim::Error& e) {
    std::cerr << "error: " << reefsim::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
