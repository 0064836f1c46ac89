#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdsec/grid_model.hpp"
#include "tdsec/profiles.hpp"

namespace tdsec {

enum class FeederShape { radial, meshed, split };
std::string_view to_string(FeederShape s);

struct FeederStatus {
  std::string feeder_id;
  FeederShape shape = FeederShape::radial;
  /// Bus ids along one cycle when meshed.
  std::vector<std::string> cycle;
};

/// Connected group of distribution buses cut off from the slack.
struct Island {
  std::vector<std::size_t> buses;
  std::optional<std::size_t> forming_inverter;  ///< largest inverter
  double available_w = 0.0;
  double demand_w = 0.0;
  bool energized = false;
};

struct TopologyReport {
  std::vector<FeederStatus> feeders;
  /// Per bus: supplied from the slack or from an adequate island.
  std::vector<bool> energized;
  /// Per bus: in the slack-connected component.
  std::vector<bool> grid_connected;
  std::vector<Island> islands;

  std::vector<std::size_t> energized_buses() const;
  std::vector<std::size_t> deenergized_buses() const;
};

/// Device states with optional overrides by id; throws InputError for an
/// unknown device id.
std::vector<SwitchState> resolve_states(const Network& net,
                                        const std::map<std::string, SwitchState>& overrides);

/// Classifies each feeder and decides energization. Islands are energized
/// iff they host an inverter and total available power covers demand.
TopologyReport analyze_topology(const Network& net, const std::vector<SwitchState>& states,
                                const OperatingPoint& op);

TopologyReport validate_topology(const Network& net,
                                 const std::map<std::string, SwitchState>& states,
                                 const OperatingPoint& op);

/// Bus ids on one cycle of the closed-branch subgraph of a feeder, or
/// empty when acyclic.
std::vector<std::string> find_feeder_cycle(const Network& net, std::size_t feeder,
                                           const std::vector<SwitchState>& states);

}  // namespace tdsec
