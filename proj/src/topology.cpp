#include "tdsec/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "tdsec/errors.hpp"

namespace tdsec {

std::string_view to_string(FeederShape s) {
  switch (s) {
    case FeederShape::radial: return "radial";
    case FeederShape::meshed: return "meshed";
    case FeederShape::split: return "split";
  }
  return "?";
}

std::vector<std::size_t> TopologyReport::energized_buses() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < energized.size(); ++i)
    if (energized[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> TopologyReport::deenergized_buses() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < energized.size(); ++i)
    if (!energized[i]) out.push_back(i);
  return out;
}

std::vector<SwitchState> resolve_states(const Network& net,
                                        const std::map<std::string, SwitchState>& overrides) {
  auto states = net.current_states();
  for (const auto& [id, st] : overrides) {
    auto d = net.find_device(id);
    if (!d)
      throw InputError(InputError::Kind::dangling_reference, "unknown switching device '" + id + "'",
                       id);
    states[*d] = st;
  }
  return states;
}

std::vector<std::string> find_feeder_cycle(const Network& net, std::size_t feeder,
                                           const std::vector<SwitchState>& states) {
  const Feeder& f = net.feeders()[feeder];
  const std::size_t nbus = net.buses().size();
  std::vector<int> color(nbus, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> parent(nbus), parent_edge(nbus);
  auto in_feeder = [&](std::size_t k) {
    return std::binary_search(f.branches.begin(), f.branches.end(), k);
  };

  std::vector<std::size_t> starts{f.root};
  starts.insert(starts.end(), f.buses.begin(), f.buses.end());
  for (auto s : starts) {
    if (color[s]) continue;
    // Iterative DFS keeping (node, next incident position).
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    color[s] = 1;
    parent_edge[s] = static_cast<std::size_t>(-1);
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      const auto& inc = net.incident(u);
      if (pos == inc.size()) {
        color[u] = 2;
        stack.pop_back();
        continue;
      }
      const auto k = inc[pos++];
      if (!in_feeder(k) || !net.closed(k, states) || k == parent_edge[u]) continue;
      const auto v = net.from_bus(k) == u ? net.to_bus(k) : net.from_bus(k);
      if (color[v] == 1) {
        std::vector<std::string> cycle;
        for (auto w = u; w != v; w = parent[w]) cycle.push_back(net.buses()[w].id);
        cycle.push_back(net.buses()[v].id);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (color[v] == 0) {
        color[v] = 1;
        parent[v] = u;
        parent_edge[v] = k;
        stack.emplace_back(v, 0);
      }
    }
  }
  return {};
}

TopologyReport analyze_topology(const Network& net, const std::vector<SwitchState>& states,
                                const OperatingPoint& op) {
  const std::size_t nbus = net.buses().size();
  TopologyReport rep;
  rep.energized.assign(nbus, false);
  rep.grid_connected.assign(nbus, false);

  // Component labels over closed branches.
  std::vector<std::size_t> comp(nbus, static_cast<std::size_t>(-1));
  std::size_t ncomp = 0;
  for (std::size_t s = 0; s < nbus; ++s) {
    if (comp[s] != static_cast<std::size_t>(-1)) continue;
    std::deque<std::size_t> q{s};
    comp[s] = ncomp;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop_front();
      for (auto k : net.incident(u)) {
        if (!net.closed(k, states)) continue;
        const auto v = net.from_bus(k) == u ? net.to_bus(k) : net.from_bus(k);
        if (comp[v] == static_cast<std::size_t>(-1)) {
          comp[v] = ncomp;
          q.push_back(v);
        }
      }
    }
    ++ncomp;
  }

  const auto grid = comp[net.slack()];
  for (std::size_t i = 0; i < nbus; ++i) {
    rep.grid_connected[i] = comp[i] == grid;
    rep.energized[i] = rep.grid_connected[i];
  }

  for (std::size_t fi = 0; fi < net.feeders().size(); ++fi) {
    const Feeder& f = net.feeders()[fi];
    FeederStatus st;
    st.feeder_id = f.id;
    st.cycle = find_feeder_cycle(net, fi, states);
    if (!st.cycle.empty()) {
      st.shape = FeederShape::meshed;
    } else {
      bool split = false;
      for (auto b : f.buses) split = split || comp[b] != comp[f.root];
      st.shape = split ? FeederShape::split : FeederShape::radial;
    }
    rep.feeders.push_back(std::move(st));
  }

  // Components cut off from the slack, in order of their smallest bus.
  std::vector<std::vector<std::size_t>> members(ncomp);
  for (std::size_t i = 0; i < nbus; ++i) members[comp[i]].push_back(i);
  for (std::size_t c = 0; c < ncomp; ++c) {
    if (c == grid) continue;
    const auto& buses = members[c];
    const bool all_distribution = std::all_of(buses.begin(), buses.end(), [&](std::size_t b) {
      return net.buses()[b].kind == BusKind::distribution;
    });
    if (!all_distribution) continue;
    Island isl;
    isl.buses = buses;
    for (std::size_t l = 0; l < net.loads().size(); ++l)
      if (comp[net.load_bus(l)] == c) isl.demand_w += op.load_demand_w[l];
    for (std::size_t i = 0; i < net.inverters().size(); ++i) {
      if (comp[net.inverter_bus(i)] != c) continue;
      isl.available_w += op.inverter_available_w[i];
      if (!isl.forming_inverter) {
        isl.forming_inverter = i;
      } else {
        const auto& best = net.inverters()[*isl.forming_inverter];
        const auto& cand = net.inverters()[i];
        if (cand.s_rated > best.s_rated || (cand.s_rated == best.s_rated && cand.id < best.id))
          isl.forming_inverter = i;
      }
    }
    isl.energized = isl.forming_inverter.has_value() && isl.available_w >= isl.demand_w;
    if (isl.energized)
      for (auto b : buses) rep.energized[b] = true;
    rep.islands.push_back(std::move(isl));
  }
  return rep;
}

TopologyReport validate_topology(const Network& net,
                                 const std::map<std::string, SwitchState>& states,
                                 const OperatingPoint& op) {
  return analyze_topology(net, resolve_states(net, states), op);
}

}  // namespace tdsec
