#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <iostream>
#include <optional>

#include "tdsec/attack.hpp"
#include "tdsec/cli.hpp"
#include "tdsec/errors.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/power_flow.hpp"
#include "tdsec/profiles.hpp"
#include "tdsec/risk.hpp"
#include "tdsec/stealth.hpp"
#include "tdsec/violations.hpp"

namespace py = pybind11;
using namespace tdsec;

namespace {

struct Loaded {
  Network net;
  ProfileSet profiles;
};

Loaded load(const std::string& network_path, const std::optional<std::string>& profiles_dir) {
  Network net = load_network(network_path);
  const auto dir = profiles_dir ? *profiles_dir
                                : std::filesystem::path(network_path).parent_path().string();
  ProfileSet p = load_profiles(net, dir);
  return {std::move(net), std::move(p)};
}

RunSettings settings(double horizon, double step) {
  RunSettings r{horizon, step};
  r.validate();
  return r;
}

py::dict type_dict(const TypeCounts& c) {
  py::dict d;
  for (std::size_t i = 0; i < violation_type_count; ++i)
    d[py::str(std::string(to_string(all_violation_types[i])))] = c[i];
  return d;
}

py::dict ranked_dict(const RankedThreat& r) {
  py::dict d;
  d["id"] = r.scenario.id;
  d["affected_asset"] = r.scenario.affected_asset;
  d["probability"] = r.probability;
  d["severity"] = r.severity;
  d["risk"] = r.risk;
  d["severity_from_override"] = r.severity_from_override;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Integrated grid attack-impact simulation and threat scoring";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Network>(m, "Network")
      .def_property_readonly("bus_ids", [](const Network& n) {
        std::vector<std::string> v;
        for (const auto& b : n.buses()) v.push_back(b.id);
        return v;
      })
      .def_property_readonly("device_ids", [](const Network& n) {
        std::vector<std::string> v;
        for (const auto& d : n.switches()) v.push_back(d.id);
        return v;
      })
      .def_property_readonly("inverter_ids", [](const Network& n) {
        std::vector<std::string> v;
        for (const auto& i : n.inverters()) v.push_back(i.id);
        return v;
      })
      .def_property_readonly("feeder_ids", [](const Network& n) {
        std::vector<std::string> v;
        for (const auto& f : n.feeders()) v.push_back(f.id);
        return v;
      })
      .def("serialize", [](const Network& n) { return serialize_network(n.data()); })
      .def("__eq__", [](const Network& a, const Network& b) { return a == b; });

  m.def("load_network", &load_network, py::arg("path"));
  m.def("parse_network", [](const std::string& text) { return parse_network(text); }, py::arg("text"));

  m.def(
      "solve",
      [](const std::string& network_path, double time_s, std::optional<std::string> profiles_dir) {
        const auto in = load(network_path, profiles_dir);
        const auto sol = solve_integrated(in.net, in.profiles, time_s, SolverConfig{});
        py::dict v;
        for (std::size_t b = 0; b < in.net.buses().size(); ++b)
          v[py::str(in.net.buses()[b].id)] = std::abs(sol.bus_voltage_pu[b]);
        py::dict out;
        out["voltage_pu"] = v;
        out["losses_pu"] = sol.losses_pu;
        out["power_balance_residual"] = power_balance_residual(in.net, sol);
        return out;
      },
      py::arg("network_path"), py::arg("time_s") = 0.0, py::arg("profiles_dir") = py::none(),
      "Voltage magnitudes at one instant with every device in its current state.");

  m.def(
      "run_scenario",
      [](const std::string& network_path, const std::string& scenario_path, const std::string& id,
         double horizon, double step, double voltage_band, std::optional<std::string> profiles_dir) {
        const auto in = load(network_path, profiles_dir);
        const auto file = load_scenarios(scenario_path);
        const auto* scn = file.find(id);
        if (!scn)
          throw InputError(InputError::Kind::dangling_reference, "unknown scenario '" + id + "'", id);
        const auto run = settings(horizon, step);
        check_profile_coverage(in.net, in.profiles, run.horizon, run.step);
        const auto limits = LimitSet::from_network(in.net, voltage_band);
        limits.validate();
        const auto r = run_scenario(in.net, in.profiles, *scn, file.operator_commands, run, SolverConfig{});
        const auto d = compare_timelines(in.net, r.baseline, r.attacked, limits);
        py::dict out;
        out["scenario_id"] = id;
        out["baseline_total"] = d.baseline.total;
        out["attacked_total"] = d.attacked.total;
        out["delta_total"] = d.total;
        out["delta_per_step"] = d.per_step;
        out["baseline_by_type"] = type_dict(d.baseline.by_type);
        out["attacked_by_type"] = type_dict(d.attacked.by_type);
        out["failed_steps"] = r.baseline.failed_steps() + r.attacked.failed_steps();
        return out;
      },
      py::arg("network_path"), py::arg("scenario_path"), py::arg("scenario_id"),
      py::arg("horizon") = 86400.0, py::arg("step") = 900.0, py::arg("voltage_band") = 0.05,
      py::arg("profiles_dir") = py::none());

  m.def(
      "sweep",
      [](const std::string& network_path, std::optional<std::string> scenario_path,
         std::optional<std::vector<std::string>> devices, double horizon, double step,
         unsigned workers, std::optional<std::string> profiles_dir) {
        const auto in = load(network_path, profiles_dir);
        CommandStream ops;
        if (scenario_path) ops = load_scenarios(*scenario_path).operator_commands;
        std::vector<std::string> ids;
        if (devices) {
          ids = *devices;
        } else {
          for (const auto& d : in.net.switches())
            if (d.control == DeviceControl::scada_controlled) ids.push_back(d.id);
        }
        SweepSettings ss;
        ss.workers = workers;
        const auto res = [&] {
          py::gil_scoped_release release;
          return criticality_sweep(in.net, in.profiles, ops, ids, settings(horizon, step),
                                   SolverConfig{}, LimitSet::from_network(in.net), ss);
        }();
        py::list out;
        for (const auto& e : res.ranked) {
          py::dict d;
          d["device"] = e.device_id;
          d["violation_delta"] = e.violation_count;
          d["electrical_distance_pu"] = e.electrical_distance;
          d["baseline_total"] = e.baseline_total;
          d["attacked_total"] = e.attacked_total;
          out.append(d);
        }
        for (const auto& e : res.failed) {
          py::dict d;
          d["device"] = e.device_id;
          d["failure"] = *e.failure;
          out.append(d);
        }
        return out;
      },
      py::arg("network_path"), py::arg("scenario_path") = py::none(), py::arg("devices") = py::none(),
      py::arg("horizon") = 86400.0, py::arg("step") = 900.0, py::arg("workers") = 1u,
      py::arg("profiles_dir") = py::none());

  m.def(
      "stealth_windows",
      [](double duration, const std::vector<std::pair<double, double>>& monitors, double horizon) {
        std::vector<MonitorPoint> mps;
        for (std::size_t i = 0; i < monitors.size(); ++i) {
          MonitorPoint mp;
          mp.id = "mp" + std::to_string(i);
          mp.sampling_interval = monitors[i].first;
          mp.phase_offset = monitors[i].second;
          mps.push_back(mp);
        }
        std::vector<std::tuple<double, double, bool>> out;
        for (const auto& w : stealth_windows(duration, mps, horizon)) out.emplace_back(w.lo, w.hi, w.lo_open);
        return out;
      },
      py::arg("duration"), py::arg("monitors"), py::arg("horizon") = 86400.0,
      "Start-time windows (lo, hi, lo_open) for an event of the given duration that no "
      "(interval, offset) monitor samples.");

  m.def(
      "severity",
      [](const std::vector<int>& priorities, const std::vector<int>& scores) {
        if (priorities.size() != scores.size())
          throw InputError(InputError::Kind::invariant, "priorities and scores differ in length");
        std::vector<ImpactArea> areas;
        ThreatScenario s;
        for (std::size_t i = 0; i < priorities.size(); ++i) {
          areas.push_back({"area" + std::to_string(i), priorities[i]});
          if (scores[i] < 1 || scores[i] > 3)
            throw InputError(InputError::Kind::invariant, "scores must be 1, 2 or 3");
          s.impact_scores[areas.back().name] = static_cast<QualitativeScore>(scores[i]);
        }
        ThreatCatalog cat{areas, {s}};
        cat.validate();
        return severity(s, areas);
      },
      py::arg("priorities"), py::arg("scores"));

  m.def(
      "risk_score",
      [](const std::string& probability, int sev) {
        const auto p = qualitative_score_from(probability);
        if (!p) throw InputError(InputError::Kind::invariant, "unknown probability '" + probability + "'");
        return risk_score(*p, sev);
      },
      py::arg("probability"), py::arg("severity"));

  m.def(
      "rank_catalog",
      [](std::optional<std::string> path) {
        const auto cat = path ? load_catalog(*path) : bundled_threat_catalog();
        py::list out;
        for (const auto& r : rank_catalog(cat)) out.append(ranked_dict(r));
        return out;
      },
      py::arg("path") = py::none(), "Ranked threat catalog; the bundled one when no path is given.");

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        py::scoped_ostream_redirect out(std::cout), err(std::cerr);
        return run_cli(args, std::cout, std::cerr);
      },
      py::arg("args"), "Runs the command-line interface and returns its exit code.");
}
