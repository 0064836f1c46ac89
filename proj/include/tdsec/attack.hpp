#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdsec/commands.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/power_flow.hpp"
#include "tdsec/profiles.hpp"

namespace tdsec {

enum class AttackClass { data_tamper, command_block, time_delay };
enum class BlockFilter { open, close, all };

std::string_view to_string(AttackClass c);
std::string_view to_string(BlockFilter f);

/// Switching transient forced by the attacker: `state` from t_start
/// for `duration` seconds.
struct Transient {
  SwitchState state = SwitchState::open;
  double duration = 0.0;

  bool operator==(const Transient&) const = default;
};

struct AttackScenario {
  std::string id;
  AttackClass kind = AttackClass::command_block;
  std::vector<std::string> targets;
  double t_start = 0.0;
  double t_end = 0.0;  ///< exclusive

  // data_tamper
  InverterControl control;
  // command_block
  BlockFilter block = BlockFilter::all;
  std::optional<SwitchState> forced;
  // time_delay
  double delay = 0.0;
  std::optional<Transient> transient;

  bool operator==(const AttackScenario&) const = default;
};

/// Scenario file: the operator's baseline command schedule plus attacks.
struct ScenarioFile {
  std::string format_version = "1.0";
  CommandStream operator_commands;
  std::vector<AttackScenario> scenarios;

  const AttackScenario* find(std::string_view id) const;
};

ScenarioFile parse_scenarios(std::string_view text);
ScenarioFile load_scenarios(const std::string& path);

/// Throws InputError on class/target mismatch or a window outside
/// [0, horizon].
void validate_scenario(const AttackScenario& scn, const Network& net, double horizon);

/// Rewrites the command stream as the devices would receive it under the
/// attack. Tampered controls and forced states are restored to their
/// baseline values at the end of the window. Applying a scenario to a
/// stream it has already been applied to returns the stream unchanged.
CommandStream apply_attack(const AttackScenario& scn, const CommandStream& commands,
                           const Network& net, double horizon);

struct ScenarioRun {
  Timeline baseline;
  Timeline attacked;
  CommandStream attacked_commands;
};

ScenarioRun run_scenario(const Network& net, const ProfileSet& profiles, const AttackScenario& scn,
                         const CommandStream& operator_commands, const RunSettings& run,
                         const SolverConfig& cfg);

/// Device state just before time t when the stream is replayed from the
/// network's current state.
SwitchState replay_state(const Network& net, const CommandStream& commands,
                         std::string_view device, double t);
InverterControl replay_control(const Network& net, const CommandStream& commands,
                               std::string_view inverter, double t);

}  // namespace tdsec
