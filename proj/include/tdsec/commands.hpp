#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tdsec/grid_model.hpp"

namespace tdsec {

enum class Origin { operator_, attacker };
std::string_view to_string(Origin o);

/// A switching command (open/close) or an inverter control change.
using CommandAction = std::variant<SwitchState, InverterControl>;

struct CommandEvent {
  double issue_time = 0.0;
  std::string target;  ///< switching device or inverter id
  CommandAction action;
  Origin origin = Origin::operator_;
  /// When the device acts on it; equals issue_time unless delayed.
  double effective_time = 0.0;
  /// Scenario that injected the command; empty for operator commands.
  std::string scenario_id;

  bool operator==(const CommandEvent&) const = default;
};

using CommandStream = std::vector<CommandEvent>;

CommandEvent operator_command(double time, std::string target, CommandAction action);

/// Order in which commands take effect: effective_time, then attacker
/// commands before operator commands, then stream position. Returns
/// stream indices.
std::vector<std::size_t> delivery_order(const CommandStream& commands);

/// Checks targets exist and actions match the target kind.
void validate_commands(const Network& net, const CommandStream& commands);

}  // namespace tdsec
