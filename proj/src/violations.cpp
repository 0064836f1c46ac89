#include "tdsec/violations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <thread>

#include "tdsec/errors.hpp"

namespace tdsec {

std::string_view to_string(ViolationType t) {
  switch (t) {
    case ViolationType::overvoltage: return "overvoltage";
    case ViolationType::undervoltage: return "undervoltage";
    case ViolationType::overcurrent: return "overcurrent";
    case ViolationType::overpower: return "overpower";
    case ViolationType::loss_of_supply: return "loss_of_supply";
  }
  return "?";
}

LimitSet LimitSet::from_network(const Network& net, double voltage_band, bool count_unserved) {
  LimitSet l;
  l.voltage_band = voltage_band;
  l.count_unserved_as_violation = count_unserved;
  for (const auto& b : net.buses()) l.nominal_voltage.push_back(b.nominal_voltage);
  for (const auto& br : net.branches()) l.ampacity.push_back(br.ampacity);
  for (const auto& inv : net.inverters()) l.inverter_rating.push_back(inv.s_rated);
  l.validate();
  return l;
}

void LimitSet::validate() const {
  if (!(voltage_band > 0.0 && voltage_band < 1.0))
    throw InputError(InputError::Kind::invariant,
                     "voltage band must lie in (0, 1), got " + std::to_string(voltage_band));
}

VoltageLimits voltage_limits(double nominal_v, double band) {
  return {nominal_v * (1.0 - band), nominal_v * (1.0 + band)};
}

std::vector<ViolationRecord> check_violations(const Network& net, const SystemSolution& sol,
                                              const LimitSet& limits) {
  std::vector<ViolationRecord> out;
  if (!sol.converged) return out;
  const auto add = [&](const std::string& id, ViolationType t, double obs, double lim) {
    out.push_back({sol.timestep, id, t, obs, lim});
  };

  for (std::size_t b = 0; b < net.buses().size(); ++b) {
    if (!sol.energized[b]) continue;
    const double nominal = limits.nominal_voltage[b];
    const auto lim = voltage_limits(nominal, limits.voltage_band);
    const double vm = std::abs(sol.bus_voltage_pu[b]);
    const double volts = vm * nominal;
    const double eps = limit_slack * nominal;
    if (volts > lim.high + eps)
      add(net.buses()[b].id, ViolationType::overvoltage, vm, 1.0 + limits.voltage_band);
    else if (volts < lim.low - eps)
      add(net.buses()[b].id, ViolationType::undervoltage, vm, 1.0 - limits.voltage_band);
  }

  for (std::size_t k = 0; k < net.branches().size(); ++k) {
    const double amps = std::abs(sol.branch_current_a[k]);
    const double cap = limits.ampacity[k];
    if (amps > cap * (1.0 + limit_slack))
      add(net.branches()[k].id, ViolationType::overcurrent, amps, cap);
  }

  for (std::size_t i = 0; i < net.inverters().size(); ++i) {
    const auto& o = sol.inverter_output[i];
    const double s = std::hypot(o.p_w, o.q_var);
    const double cap = limits.inverter_rating[i];
    if (s > cap * (1.0 + limit_slack))
      add(net.inverters()[i].id, ViolationType::overpower, s, cap);
  }

  if (limits.count_unserved_as_violation)
    for (std::size_t l = 0; l < net.loads().size(); ++l)
      if (!sol.load_served[l])
        add(net.loads()[l].id, ViolationType::loss_of_supply, sol.load_demand_w[l], 0.0);
  return out;
}

ViolationCounts count_timeline(const Network& net, const Timeline& tl, const LimitSet& limits) {
  limits.validate();
  ViolationCounts c;
  c.per_step.assign(tl.steps.size(), 0);
  c.per_step_by_type.assign(tl.steps.size(), TypeCounts{});
  for (std::size_t k = 0; k < tl.steps.size(); ++k) {
    auto recs = check_violations(net, tl.steps[k], limits);
    for (auto& r : recs) {
      r.timestep = k;
      const auto t = static_cast<std::size_t>(r.type);
      ++c.per_step_by_type[k][t];
      ++c.by_type[t];
    }
    c.per_step[k] = recs.size();
    c.total += recs.size();
    c.records.insert(c.records.end(), std::make_move_iterator(recs.begin()),
                     std::make_move_iterator(recs.end()));
  }
  return c;
}

ViolationDelta compare_timelines(const Network& net, const Timeline& baseline,
                                 const Timeline& attacked, const LimitSet& limits) {
  if (baseline.steps.size() != attacked.steps.size())
    throw InputError(InputError::Kind::invariant, "timelines differ in length");
  ViolationDelta d;
  d.baseline = count_timeline(net, baseline, limits);
  d.attacked = count_timeline(net, attacked, limits);
  d.per_step.resize(baseline.steps.size());
  for (std::size_t k = 0; k < d.per_step.size(); ++k)
    d.per_step[k] = static_cast<long long>(d.attacked.per_step[k]) -
                    static_cast<long long>(d.baseline.per_step[k]);
  for (std::size_t t = 0; t < violation_type_count; ++t)
    d.by_type[t] = static_cast<long long>(d.attacked.by_type[t]) -
                   static_cast<long long>(d.baseline.by_type[t]);
  d.total = static_cast<long long>(d.attacked.total) - static_cast<long long>(d.baseline.total);
  return d;
}

std::vector<double> bus_electrical_distance(const Network& net) {
  const auto normal = net.normal_states();
  const std::size_t n = net.buses().size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[net.slack()] = 0.0;
  pq.emplace(0.0, net.slack());
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto k : net.incident(u)) {
      if (!net.closed(k, normal)) continue;
      const std::size_t v = net.from_bus(k) == u ? net.to_bus(k) : net.from_bus(k);
      const double nd = d + std::abs(net.impedance_pu(k));
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

double electrical_distance(const Network& net, std::size_t device) {
  const auto dist = bus_electrical_distance(net);
  const auto k = net.device_branch(device);
  return std::min(dist[net.from_bus(k)], dist[net.to_bus(k)]);
}

AttackScenario sweep_scenario(const std::string& device_id, double t_start, double t_end) {
  AttackScenario s;
  s.id = "sweep:" + device_id;
  s.kind = AttackClass::command_block;
  s.targets = {device_id};
  s.t_start = t_start;
  s.t_end = t_end;
  s.block = BlockFilter::all;
  s.forced = SwitchState::open;
  return s;
}

SweepResult criticality_sweep(const Network& net, const ProfileSet& profiles,
                              const CommandStream& operator_commands,
                              const std::vector<std::string>& device_ids, const RunSettings& run,
                              const SolverConfig& cfg, const LimitSet& limits,
                              const SweepSettings& sweep) {
  limits.validate();
  const double t_end = sweep.t_end < 0.0 ? run.horizon : sweep.t_end;
  std::vector<AttackScenario> scenarios;
  for (const auto& id : device_ids) {
    scenarios.push_back(sweep_scenario(id, sweep.t_start, t_end));
    validate_scenario(scenarios.back(), net, run.horizon);
  }

  const Timeline baseline = time_series_run(net, profiles, run, operator_commands, cfg);
  const auto base_counts = count_timeline(net, baseline, limits);
  const auto dist = bus_electrical_distance(net);

  std::vector<CriticalityEntry> entries(device_ids.size());
  const auto evaluate = [&](std::size_t i) {
    auto& e = entries[i];
    e.device_id = device_ids[i];
    const auto k = net.device_branch(*net.find_device(e.device_id));
    e.electrical_distance = std::min(dist[net.from_bus(k)], dist[net.to_bus(k)]);
    e.baseline_total = base_counts.total;
    try {
      const auto cmds = apply_attack(scenarios[i], operator_commands, net, run.horizon);
      const auto tl = time_series_run(net, profiles, run, cmds, cfg);
      if (const auto failed = tl.failed_steps(); failed > 0) {
        e.failure = std::to_string(failed) + " step(s) did not converge";
        return;
      }
      const auto c = count_timeline(net, tl, limits);
      e.attacked_total = c.total;
      e.attacked_by_type = c.by_type;
      e.violation_count =
          static_cast<long long>(c.total) - static_cast<long long>(base_counts.total);
    } catch (const std::exception& ex) {
      e.failure = ex.what();
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(sweep.workers, static_cast<unsigned>(entries.size())));
  std::atomic<std::size_t> next{0};
  const auto drain = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) evaluate(i);
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
  }

  SweepResult r;
  for (auto& e : entries) (e.failure ? r.failed : r.ranked).push_back(std::move(e));
  std::stable_sort(r.ranked.begin(), r.ranked.end(),
                   [](const CriticalityEntry& a, const CriticalityEntry& b) {
                     if (a.violation_count != b.violation_count)
                       return a.violation_count > b.violation_count;
                     if (a.electrical_distance != b.electrical_distance)
                       return a.electrical_distance < b.electrical_distance;
                     return a.device_id < b.device_id;
                   });
  return r;
}

}  // namespace tdsec
