#include "tdsec/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "tdsec/attack.hpp"
#include "tdsec/errors.hpp"
#include "tdsec/report.hpp"
#include "tdsec/risk.hpp"
#include "tdsec/stealth.hpp"
#include "tdsec/topology.hpp"
#include "tdsec/violations.hpp"

namespace tdsec {

namespace fs = std::filesystem;

namespace {

constexpr const char* exit_code_help =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error\n"
    "  2  input error (missing file, syntax, unknown reference, duplicate id)\n"
    "  3  power flow did not converge\n"
    "  4  invariant breach (e.g. meshed feeder, bad window, bad limits)\n";

/// Raised when a command produced results but some step failed to solve.
struct SolverFailure {
  std::size_t failed_steps;
};

int exit_code_for(const InputError& e) {
  return e.kind() == InputError::Kind::invariant ? exit_invariant : exit_input;
}

struct Inputs {
  Network net;
  ProfileSet profiles;
};

std::string profiles_dir(const RunManifest& m) {
  if (!m.profiles_dir.empty()) return m.profiles_dir;
  const auto parent = fs::path(m.network_path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

Inputs load_inputs(const RunManifest& m) {
  if (m.network_path.empty())
    throw InputError(InputError::Kind::io, "--network is required");
  Network net = load_network(m.network_path);
  ProfileSet profiles = load_profiles(net, profiles_dir(m));
  check_profile_coverage(net, profiles, m.run.horizon, m.run.step);
  return {std::move(net), std::move(profiles)};
}

ScenarioFile load_scenario_file(const RunManifest& m) {
  if (m.scenario_path.empty()) return {};
  return load_scenarios(m.scenario_path);
}

const AttackScenario& pick_scenario(const ScenarioFile& file, const std::string& id,
                                    const std::string& path) {
  if (path.empty())
    throw InputError(InputError::Kind::io, "--scenario is required for this command");
  const auto* s = file.find(id);
  if (!s)
    throw InputError(InputError::Kind::dangling_reference,
                     "scenario '" + id + "' not found in '" + path + "'", id);
  return *s;
}

void write_file(const RunManifest& m, const std::string& name, const std::string& body,
                std::ostream& out) {
  const fs::path dir = m.out_dir.empty() ? fs::path(".") : fs::path(m.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path p = dir / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError(InputError::Kind::io, "cannot write '" + p.string() + "'", p.string());
  f << body;
  if (!f) throw InputError(InputError::Kind::io, "failed writing '" + p.string() + "'", p.string());
  out << "wrote " << p.string() << '\n';
}

bool want_csv(const RunManifest& m) { return m.format != OutputFormat::json; }
bool want_json(const RunManifest& m) { return m.format != OutputFormat::csv; }

std::string manifest_json(const RunManifest& m, const std::string& command,
                          const std::string& scenario_id) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["network"] = m.network_path;
  j["profiles"] = m.profiles_dir;
  j["scenario_file"] = m.scenario_path;
  j["scenario_id"] = scenario_id;
  j["catalog"] = m.catalog_path;
  j["horizon_s"] = m.run.horizon;
  j["step_s"] = m.run.step;
  j["voltage_band"] = m.voltage_band;
  j["solver"] = {{"bfs_tolerance", m.solver.bfs_tolerance},
                 {"bfs_max_iterations", m.solver.bfs_max_iterations},
                 {"nr_tolerance", m.solver.nr_tolerance},
                 {"nr_max_iterations", m.solver.nr_max_iterations},
                 {"boundary_tolerance", m.solver.boundary_tolerance},
                 {"boundary_max_iterations", m.solver.boundary_max_iterations}};
  j["deterministic"] = m.deterministic;
  return j.dump(2) + "\n";
}

int cmd_validate(const RunManifest& m, std::ostream& out) {
  const auto in = load_inputs(m);
  out << "network: " << in.net.buses().size() << " buses, " << in.net.branches().size()
      << " branches, " << in.net.switches().size() << " switching devices, "
      << in.net.feeders().size() << " feeders\n";
  const auto report = analyze_topology(in.net, in.net.current_states(),
                                       operating_point(in.net, in.profiles, 0.0));
  for (const auto& f : report.feeders) {
    if (f.shape == FeederShape::meshed) {
      std::string cyc;
      for (const auto& b : f.cycle) cyc += (cyc.empty() ? "" : " -> ") + b;
      throw InputError(InputError::Kind::invariant,
                       "feeder '" + f.feeder_id + "' is not radial: cycle " + cyc, f.feeder_id);
    }
  }
  out << "profiles: " << in.profiles.size() << " series cover " << m.run.horizon << " s\n";
  if (!m.scenario_path.empty()) {
    const auto file = load_scenarios(m.scenario_path);
    validate_commands(in.net, file.operator_commands);
    for (const auto& s : file.scenarios) validate_scenario(s, in.net, m.run.horizon);
    out << "scenarios: " << file.operator_commands.size() << " operator command(s), "
        << file.scenarios.size() << " scenario(s)\n";
  }
  if (!m.catalog_path.empty()) {
    const auto cat = load_catalog(m.catalog_path);
    out << "catalog: " << cat.areas.size() << " impact areas, " << cat.scenarios.size()
        << " threat scenario(s)\n";
  }
  out << "ok\n";
  return exit_ok;
}

int cmd_run(const RunManifest& m, const std::string& scenario_id, std::ostream& out) {
  const auto in = load_inputs(m);
  const auto file = load_scenario_file(m);
  const auto& scn = pick_scenario(file, scenario_id, m.scenario_path);
  const auto limits = LimitSet::from_network(in.net, m.voltage_band);
  const auto r = run_scenario(in.net, in.profiles, scn, file.operator_commands, m.run, m.solver);
  const auto delta = compare_timelines(in.net, r.baseline, r.attacked, limits);

  if (want_csv(m)) write_file(m, "violations.csv", violation_csv(delta, scn.id), out);
  if (want_json(m)) {
    write_file(m, "summary.json", violation_summary_json(delta, scn.id, r.attacked), out);
    write_file(m, "manifest.json", manifest_json(m, "run", scn.id), out);
  }
  write_file(m, "violations_per_step.svg",
             step_chart_svg(delta, m.run.step, "Violations per step: " + scn.id), out);

  out << "scenario " << scn.id << " (" << to_string(scn.kind) << ")\n";
  out << "baseline violations: " << delta.baseline.total << '\n';
  out << "attacked violations: " << delta.attacked.total << '\n';
  out << "delta: " << delta.total << '\n';
  for (auto t : all_violation_types) {
    const auto i = static_cast<std::size_t>(t);
    out << "  " << to_string(t) << ": " << delta.baseline.by_type[i] << " -> "
        << delta.attacked.by_type[i] << '\n';
  }
  const auto failed = r.baseline.failed_steps() + r.attacked.failed_steps();
  if (failed > 0) throw SolverFailure{failed};
  return exit_ok;
}

int cmd_sweep(const RunManifest& m, std::vector<std::string> devices, std::ostream& out) {
  const auto in = load_inputs(m);
  const auto file = load_scenario_file(m);
  if (devices.empty())
    for (const auto& d : in.net.switches())
      if (d.control == DeviceControl::scada_controlled) devices.push_back(d.id);
  const auto limits = LimitSet::from_network(in.net, m.voltage_band);
  SweepSettings s;
  s.workers = m.workers;
  const auto res = criticality_sweep(in.net, in.profiles, file.operator_commands, devices, m.run,
                                     m.solver, limits, s);
  if (want_csv(m)) write_file(m, "sweep.csv", sweep_csv(res), out);
  if (want_json(m)) {
    write_file(m, "sweep.json", sweep_json(res), out);
    write_file(m, "manifest.json", manifest_json(m, "sweep", ""), out);
  }
  write_file(m, "sweep.svg", sweep_chart_svg(res), out);
  std::size_t rank = 1;
  for (const auto& e : res.ranked)
    out << rank++ << ". " << e.device_id << "  delta " << e.violation_count << "  distance "
        << format_number(e.electrical_distance) << " pu\n";
  for (const auto& e : res.failed) out << "failed: " << e.device_id << ": " << *e.failure << '\n';
  if (!res.failed.empty()) throw SolverFailure{res.failed.size()};
  return exit_ok;
}

int cmd_stealth(const RunManifest& m, const std::string& scenario_id, std::ostream& out) {
  const auto in = load_inputs(m);
  const auto file = load_scenario_file(m);
  const auto& scn = pick_scenario(file, scenario_id, m.scenario_path);
  StealthReport rep;
  rep.scenario_id = scn.id;
  rep.horizon = m.run.horizon;
  rep.event_start = scn.t_start;
  if (scn.kind == AttackClass::time_delay && scn.transient) {
    rep.event_duration = scn.transient->duration;
  } else if (scn.kind == AttackClass::command_block && scn.forced) {
    rep.event_duration = scn.t_end - scn.t_start;
  } else {
    throw InputError(InputError::Kind::invariant,
                     "scenario '" + scn.id +
                         "' has no switching event (needs a time_delay transient or a forced state)",
                     scn.id);
  }
  validate_scenario(scn, in.net, m.run.horizon);
  rep.target = scn.targets.front();
  for (const auto& t : scn.targets) {
    for (auto& mp : observing_monitor_points(in.net, *in.net.find_device(t)))
      if (std::none_of(rep.window_mps.begin(), rep.window_mps.end(),
                       [&](const MonitorPoint& x) { return x.id == mp.id; }))
        rep.window_mps.push_back(mp);
  }
  for (const auto& mp : rep.window_mps) {
    const auto s = sample_instants(mp, m.run.horizon);
    rep.joint_samples.insert(rep.joint_samples.end(), s.begin(), s.end());
  }
  std::sort(rep.joint_samples.begin(), rep.joint_samples.end());
  rep.joint_samples.erase(std::unique(rep.joint_samples.begin(), rep.joint_samples.end()),
                          rep.joint_samples.end());
  rep.windows = stealth_windows(rep.event_duration, rep.joint_samples, m.run.horizon);

  const auto r = run_scenario(in.net, in.profiles, scn, file.operator_commands, m.run, m.solver);
  std::vector<DetectionVerdict> all;
  for (const auto& mp : in.net.monitor_points()) {
    auto v = detect_event(sample(in.net, mp, r.baseline), sample(in.net, mp, r.attacked));
    rep.per_mp.emplace_back(mp.id, v);
    all.push_back(std::move(v));
  }
  rep.verdict = merge_verdicts(all);

  if (want_json(m)) {
    write_file(m, "stealth.json", stealth_json(rep), out);
    write_file(m, "manifest.json", manifest_json(m, "stealth", scn.id), out);
  }
  write_file(m, "stealth.svg", stealth_strip_svg(rep), out);

  out << "event on " << rep.target << ": start " << format_number(rep.event_start)
      << " s, duration " << format_number(rep.event_duration) << " s\n";
  out << "stealth windows: " << rep.windows.size() << '\n';
  const bool in_window = std::any_of(rep.windows.begin(), rep.windows.end(),
                                     [&](const StealthWindow& w) { return w.contains(rep.event_start); });
  out << "start inside a stealth window: " << (in_window ? "yes" : "no") << '\n';
  out << "verdict: " << (rep.verdict.detected ? "detected" : "not detected");
  if (rep.verdict.first_detection_time)
    out << " (first at " << format_number(*rep.verdict.first_detection_time) << " s)";
  out << '\n';
  const auto failed = r.baseline.failed_steps() + r.attacked.failed_steps();
  if (failed > 0) throw SolverFailure{failed};
  return exit_ok;
}

int cmd_risk(const RunManifest& m, std::ostream& out) {
  const auto cat = m.catalog_path.empty() ? bundled_threat_catalog() : load_catalog(m.catalog_path);
  const auto ranked = rank_catalog(cat);
  out << risk_table_text(ranked);
  if (!m.out_dir.empty() && want_json(m)) write_file(m, "risk.json", risk_json(ranked), out);
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cyberattack impact analysis for integrated transmission and distribution grids",
               "tdsec"};
  app.footer(exit_code_help);
  app.require_subcommand(1);
  app.set_version_flag("--version", "tdsec 0.1.0");

  RunManifest m;
  m.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string scenario_id;
  std::vector<std::string> devices;
  bool step_given = false;

  const auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--network", m.network_path, "Network file")->required();
    sub->add_option("--profiles", m.profiles_dir,
                    "Directory holding the profile CSV files (default: network file's directory)")
        ;
    sub->add_option("--horizon", m.run.horizon, "Simulated horizon in seconds")
        ->capture_default_str();
    sub->add_option_function<double>(
           "--step", [&](double v) { m.run.step = v; step_given = true; },
           "Time step in seconds (default 900; 50 for stealth)");
    sub->add_option("--voltage-band", m.voltage_band, "Allowed voltage deviation, fraction of nominal")
        ->capture_default_str();
  };
  const auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", m.out_dir, "Output directory (default: current directory)");
    sub->add_option("--format", m.format, "Report formats")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, OutputFormat>{{"csv", OutputFormat::csv},
                                                {"json", OutputFormat::json},
                                                {"both", OutputFormat::both}},
            CLI::ignore_case));
  };

  auto* validate = app.add_subcommand("validate", "Check that all inputs parse and are consistent");
  add_grid(validate);
  validate->add_option("--scenario", m.scenario_path, "Scenario file");
  validate->add_option("--catalog", m.catalog_path, "Threat catalog file");

  auto* run = app.add_subcommand("run", "Run a scenario against its baseline and count violations");
  add_grid(run);
  add_out(run);
  run->add_option("id", scenario_id, "Scenario id")->required();
  run->add_option("--scenario", m.scenario_path, "Scenario file")->required();

  auto* sweep = app.add_subcommand("sweep", "Rank switching devices by violations when forced open");
  add_grid(sweep);
  add_out(sweep);
  sweep->add_option("--scenario", m.scenario_path, "Scenario file with the operator schedule")
      ;
  sweep->add_option("--devices", devices, "Devices to sweep (default: all SCADA-controlled)")
      ->delimiter(',');
  sweep->add_option("--workers", m.workers, "Worker threads (default: available processors)")
      ->check(CLI::PositiveNumber);

  auto* stealth = app.add_subcommand("stealth", "Check whether a transient event is seen by monitor points");
  add_grid(stealth);
  add_out(stealth);
  stealth->add_option("id", scenario_id, "Scenario id")->required();
  stealth->add_option("--scenario", m.scenario_path, "Scenario file")->required();

  auto* risk = app.add_subcommand("risk", "Score and rank a threat catalog");
  risk->add_option("--catalog", m.catalog_path, "Threat catalog (default: bundled catalog)")
      ;
  add_out(risk);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  if (stealth->parsed() && !step_given) m.run.step = 50.0;

  try {
    m.run.validate();
    m.solver.validate();
    if (!(m.voltage_band > 0.0 && m.voltage_band < 1.0))
      throw InputError(InputError::Kind::invariant, "--voltage-band must lie in (0, 1)");
    if (validate->parsed()) return cmd_validate(m, out);
    if (run->parsed()) return cmd_run(m, scenario_id, out);
    if (sweep->parsed()) return cmd_sweep(m, devices, out);
    if (stealth->parsed()) return cmd_stealth(m, scenario_id, out);
    if (risk->parsed()) return cmd_risk(m, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const SolverError& e) {
    err << "error: power flow failed";
    if (!e.where().empty()) err << " in " << e.where();
    err << ": " << e.what() << '\n';
    return exit_solver;
  } catch (const SolverFailure& f) {
    err << "error: " << f.failed_steps << " step(s) or run(s) did not converge\n";
    return exit_solver;
  }
  return exit_usage;
}

}  // namespace tdsec
