#pragma once

// Seeded generators shared by the property tests and the acceptance run.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tdsec/attack.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/stealth.hpp"

namespace tdsec::gen {

inline constexpr double kDay = 86400.0;

using Rng = std::mt19937_64;

inline double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
inline int pick(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
inline bool coin(Rng& g) { return pick(g, 0, 1) == 1; }

inline std::vector<std::string> scada_devices(const Network& net) {
  std::vector<std::string> ids;
  for (const auto& d : net.switches())
    if (d.control == DeviceControl::scada_controlled) ids.push_back(d.id);
  return ids;
}

inline CommandStream random_commands(Rng& g, const Network& net, int max_count) {
  const auto ids = scada_devices(net);
  CommandStream c;
  const int n = pick(g, 0, max_count);
  for (int i = 0; i < n; ++i)
    c.push_back(operator_command(300.0 * pick(g, 0, 287), ids[static_cast<std::size_t>(pick(g, 0, static_cast<int>(ids.size()) - 1))],
                                 coin(g) ? SwitchState::open : SwitchState::closed));
  return c;
}

inline AttackScenario random_scenario(Rng& g, const Network& net) {
  AttackScenario s;
  s.id = "gen";
  const double a = 900.0 * pick(g, 0, 90);
  s.t_start = a;
  s.t_end = std::min(kDay, a + 900.0 * pick(g, 1, 20));
  const int kind = pick(g, 0, 2);
  if (kind == 0 && !net.inverters().empty()) {
    s.kind = AttackClass::data_tamper;
    s.targets = {net.inverters()[static_cast<std::size_t>(pick(g, 0, static_cast<int>(net.inverters().size()) - 1))].id};
    s.control.mode = InverterMode::limit_p;
    s.control.p_limit = uniform(g, 0.0, 1e5);
    return s;
  }
  const auto ids = scada_devices(net);
  s.targets = {ids[static_cast<std::size_t>(pick(g, 0, static_cast<int>(ids.size()) - 1))]};
  if (kind == 1) {
    s.kind = AttackClass::command_block;
    s.block = static_cast<BlockFilter>(pick(g, 0, 2));
    if (coin(g)) s.forced = coin(g) ? SwitchState::open : SwitchState::closed;
  } else {
    s.kind = AttackClass::time_delay;
    s.delay = 300.0 * pick(g, 0, 6);
    if (coin(g)) s.transient = Transient{SwitchState::open, 300.0 * pick(g, 1, 6)};
  }
  return s;
}

/// Time after t_end during which a time-delay attack may still act.
inline double spill(const AttackScenario& s) {
  if (s.kind != AttackClass::time_delay) return 0.0;
  double x = s.delay;
  if (s.transient) x = std::max(x, s.t_start + s.transient->duration - s.t_end);
  return std::max(0.0, x);
}

inline std::vector<MonitorPoint> random_mps(Rng& g, int n) {
  std::vector<MonitorPoint> out;
  for (int i = 0; i < n; ++i) {
    MonitorPoint m;
    m.id = "m" + std::to_string(i);
    m.bus_id = "x";
    m.sampling_interval = 60.0 * pick(g, 5, 60);
    m.phase_offset = 30.0 * pick(g, 0, static_cast<int>(m.sampling_interval / 30.0) - 1);
    out.push_back(m);
  }
  return out;
}

inline std::set<long> starts(const std::vector<StealthWindow>& w, long d, long horizon) {
  std::set<long> s;
  for (long t = 0; t + d <= horizon; ++t)
    for (const auto& x : w)
      if (x.contains(static_cast<double>(t))) {
        s.insert(t);
        break;
      }
  return s;
}

inline bool subset(const std::set<long>& a, const std::set<long>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline NetworkData random_network(Rng& g) {
  NetworkData d;
  d.base_power_va = pick(g, 0, 1) ? 1e6 : 1e7;
  d.slack_voltage_pu = uniform(g, 0.97, 1.05);
  const int nt = pick(g, 1, 4);
  for (int i = 0; i < nt; ++i)
    d.buses.push_back({"t" + std::to_string(i), BusKind::transmission, 66400.0, ""});
  d.slack_bus = "t0";
  int nb = 0;
  auto branch = [&](const std::string& f, const std::string& t, BranchKind k) {
    Branch b;
    b.id = "br" + std::to_string(nb++);
    b.from_bus = f;
    b.to_bus = t;
    b.impedance_ohm = {uniform(g, 0.01, 10.0), uniform(g, 0.01, 40.0)};
    b.ampacity = uniform(g, 5.0, 500.0);
    b.kind = k;
    d.branches.push_back(b);
    return b.id;
  };
  for (int i = 1; i < nt; ++i) branch("t" + std::to_string(pick(g, 0, i - 1)), "t" + std::to_string(i), BranchKind::line);
  if (nt >= 3 && coin(g)) branch("t1", "t2", BranchKind::line);

  std::vector<std::string> dist;
  const int nf = pick(g, 1, 3);
  for (int f = 0; f < nf; ++f) {
    const std::string fid = "F" + std::to_string(f);
    std::vector<std::string> fb;
    const int n = pick(g, 1, 6);
    for (int i = 0; i < n; ++i) {
      const std::string id = fid + "_" + std::to_string(i);
      d.buses.push_back({id, BusKind::distribution, coin(g) ? 7200.0 : 12470.0, fid});
      if (i == 0) {
        const std::string root = "t" + std::to_string(pick(g, 0, nt - 1));
        branch(root, id, BranchKind::transformer);
        d.boundary.push_back({root, id});
      } else {
        branch(fb[static_cast<std::size_t>(pick(g, 0, i - 1))], id, BranchKind::line);
      }
      fb.push_back(id);
      dist.push_back(id);
    }
  }
  const auto any_dist = [&] { return dist[static_cast<std::size_t>(pick(g, 0, static_cast<int>(dist.size()) - 1))]; };

  std::vector<bool> has_switch(d.branches.size(), false);
  for (std::size_t k = 0; k < d.branches.size(); ++k) {
    if (!coin(g)) continue;
    SwitchingDevice s;
    s.id = "sw" + std::to_string(k);
    s.branch_id = d.branches[k].id;
    s.kind = static_cast<DeviceKind>(pick(g, 0, 2));
    s.normal_state = SwitchState::closed;
    s.current_state = coin(g) ? SwitchState::closed : SwitchState::open;
    s.control = coin(g) ? DeviceControl::scada_controlled : DeviceControl::local_only;
    d.switches.push_back(s);
  }
  for (int i = 0, n = pick(g, 0, 5); i < n; ++i)
    d.loads.push_back({"ld" + std::to_string(i), coin(g) ? any_dist() : "t0", "demand",
                       uniform(g, 1e3, 5e5), uniform(g, 0.8, 1.0), coin(g)});
  for (int i = 0, n = pick(g, 0, 3); i < n; ++i) {
    Inverter inv;
    inv.id = "pv" + std::to_string(i);
    inv.bus_id = any_dist();
    inv.s_rated = uniform(g, 1e4, 5e5);
    inv.profile_id = "pv";
    inv.scale = inv.s_rated * uniform(g, 0.1, 1.0);
    inv.control.mode = static_cast<InverterMode>(pick(g, 0, 2));
    inv.control.pf_setpoint = (coin(g) ? 1.0 : -1.0) * uniform(g, 0.8, 1.0);
    if (inv.control.mode == InverterMode::limit_p || coin(g))
      inv.control.p_limit = uniform(g, 0.0, inv.s_rated);
    inv.control.q_setpoint = uniform(g, -inv.s_rated, inv.s_rated);
    d.inverters.push_back(inv);
  }
  for (int i = 0, n = pick(g, 0, 2); i < n; ++i) {
    MonitorPoint m;
    m.id = "mp" + std::to_string(i);
    m.bus_id = any_dist();
    m.sampling_interval = 60.0 * pick(g, 1, 30);
    m.phase_offset = uniform(g, 0.0, m.sampling_interval);
    m.quantities = {Quantity::voltage};
    if (coin(g)) m.quantities.push_back(Quantity::current);
    if (coin(g)) m.quantities.push_back(Quantity::device_state);
    d.monitor_points.push_back(m);
  }
  d.profiles_ref = {{"demand", "demand.csv"}, {"pv", "pv.csv"}};
  return d;
}

}  // namespace tdsec::gen
