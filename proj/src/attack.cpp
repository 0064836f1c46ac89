#include "tdsec/attack.hpp"

#include <algorithm>
#include <cmath>

#include "tdsec/errors.hpp"
#include "yaml_util.hpp"

namespace tdsec {

using detail::enum_field;
using detail::fail_at;
using detail::optional_field;
using detail::optional_or;
using detail::required;
using detail::sequence;

std::string_view to_string(AttackClass c) {
  switch (c) {
    case AttackClass::data_tamper: return "data_tamper";
    case AttackClass::command_block: return "command_block";
    case AttackClass::time_delay: return "time_delay";
  }
  return "?";
}

std::string_view to_string(BlockFilter f) {
  switch (f) {
    case BlockFilter::open: return "open";
    case BlockFilter::close: return "close";
    case BlockFilter::all: return "all";
  }
  return "?";
}

namespace {

std::optional<AttackClass> attack_class_from(std::string_view s) {
  for (auto c : {AttackClass::data_tamper, AttackClass::command_block, AttackClass::time_delay})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<BlockFilter> block_filter_from(std::string_view s) {
  for (auto f : {BlockFilter::open, BlockFilter::close, BlockFilter::all})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

bool in_window(const AttackScenario& scn, double t) { return t >= scn.t_start && t < scn.t_end; }

bool targeted(const AttackScenario& scn, const std::string& id) {
  return std::find(scn.targets.begin(), scn.targets.end(), id) != scn.targets.end();
}

bool blocked_by(BlockFilter f, const CommandAction& a) {
  const auto* st = std::get_if<SwitchState>(&a);
  if (!st) return false;
  switch (f) {
    case BlockFilter::all: return true;
    case BlockFilter::open: return *st == SwitchState::open;
    case BlockFilter::close: return *st == SwitchState::closed;
  }
  return false;
}

CommandEvent attacker_command(const AttackScenario& scn, double t, const std::string& target,
                              CommandAction action) {
  CommandEvent e;
  e.issue_time = t;
  e.effective_time = t;
  e.target = target;
  e.action = std::move(action);
  e.origin = Origin::attacker;
  e.scenario_id = scn.id;
  return e;
}

}  // namespace

const AttackScenario* ScenarioFile::find(std::string_view id) const {
  for (const auto& s : scenarios)
    if (s.id == id) return &s;
  return nullptr;
}

ScenarioFile parse_scenarios(std::string_view text) {
  const YAML::Node root = detail::load_yaml(text);
  if (!root.IsMap()) throw InputError(InputError::Kind::syntax, "scenario file must be a mapping");
  ScenarioFile file;
  detail::check_format_version(root, "scenario file", &file.format_version);

  for (const auto& r : sequence(root, "operator_commands")) {
    if (!r.IsMap()) fail_at(r, InputError::Kind::syntax, "operator_commands entries must be mappings");
    const auto target = required<std::string>(r, "target", "operator_commands");
    const auto t = required<double>(r, "time", target);
    if (r["control"]) {
      file.operator_commands.push_back(operator_command(t, target, detail::parse_control(r["control"], target)));
    } else {
      const auto st = enum_field(r, "action", target, switch_state_from, "open|closed");
      file.operator_commands.push_back(operator_command(t, target, st));
    }
  }

  for (const auto& r : sequence(root, "scenarios")) {
    AttackScenario s;
    s.id = detail::record_id(r, "scenarios");
    if (root["scenarios"] && file.find(s.id))
      fail_at(r, InputError::Kind::duplicate_id, "duplicate scenario id '" + s.id + "'", s.id, s.id);
    s.kind = enum_field(r, "class", s.id, attack_class_from, "data_tamper|command_block|time_delay");
    const YAML::Node targets = r["targets"];
    if (!targets || !targets.IsSequence())
      fail_at(r, InputError::Kind::syntax, "scenario '" + s.id + "' needs a targets list", s.id, s.id);
    for (const auto& t : targets) s.targets.push_back(t.as<std::string>());
    const YAML::Node w = r["window"];
    if (!w || !w.IsSequence() || w.size() != 2)
      fail_at(r, InputError::Kind::syntax, "scenario '" + s.id + "' needs window: [t_start, t_end]",
              s.id, s.id);
    s.t_start = detail::scalar_as<double>(w[0], "window", s.id);
    s.t_end = detail::scalar_as<double>(w[1], "window", s.id);
    switch (s.kind) {
      case AttackClass::data_tamper:
        if (!r["control"]) fail_at(r, InputError::Kind::syntax, "data_tamper scenario '" + s.id + "' needs control", s.id, s.id);
        s.control = detail::parse_control(r["control"], s.id);
        break;
      case AttackClass::command_block:
        s.block = r["block"] ? enum_field(r, "block", s.id, block_filter_from, "open|close|all")
                             : BlockFilter::all;
        if (r["forced"]) s.forced = enum_field(r, "forced", s.id, switch_state_from, "open|closed");
        break;
      case AttackClass::time_delay:
        s.delay = optional_or<double>(r, "delay", 0.0, s.id);
        if (const YAML::Node tr = r["transient"]; tr && !tr.IsNull()) {
          Transient t;
          t.state = enum_field(tr, "state", s.id, switch_state_from, "open|closed");
          t.duration = required<double>(tr, "duration", s.id);
          s.transient = t;
        }
        break;
    }
    file.scenarios.push_back(std::move(s));
  }
  return file;
}

ScenarioFile load_scenarios(const std::string& path) {
  return parse_scenarios(detail::read_text_file(path));
}

void validate_scenario(const AttackScenario& scn, const Network& net, double horizon) {
  auto bad = [&](std::string msg, std::string subject = {}) {
    throw InputError(InputError::Kind::invariant, "scenario '" + scn.id + "': " + msg,
                     std::move(subject), scn.id);
  };
  if (!(scn.t_start >= 0.0 && scn.t_start < scn.t_end && scn.t_end <= horizon))
    bad("window [" + std::to_string(scn.t_start) + ", " + std::to_string(scn.t_end) +
        ") must satisfy 0 <= t_start < t_end <= horizon (" + std::to_string(horizon) + ")");
  if (scn.targets.empty()) bad("no targets");
  for (const auto& id : scn.targets) {
    if (scn.kind == AttackClass::data_tamper) {
      if (!net.find_inverter(id)) {
        if (net.find_device(id)) bad("data_tamper targets inverters, '" + id + "' is a switching device", id);
        throw InputError(InputError::Kind::dangling_reference,
                         "scenario '" + scn.id + "' targets unknown inverter '" + id + "'", id, scn.id);
      }
    } else {
      const auto d = net.find_device(id);
      if (!d) {
        if (net.find_inverter(id)) bad(std::string(to_string(scn.kind)) + " targets switching devices, '" + id + "' is an inverter", id);
        throw InputError(InputError::Kind::dangling_reference,
                         "scenario '" + scn.id + "' targets unknown device '" + id + "'", id, scn.id);
      }
      if (net.switches()[*d].control != DeviceControl::scada_controlled)
        bad("device '" + id + "' is not scada_controlled", id);
    }
  }
  if (scn.kind == AttackClass::data_tamper)
    if (auto why = control_problem(scn.control)) bad(*why);
  if (scn.kind == AttackClass::time_delay) {
    if (!(scn.delay >= 0.0)) bad("delay must be >= 0");
    if (scn.transient && !(scn.transient->duration > 0.0)) bad("transient duration must be > 0");
  }
}

SwitchState replay_state(const Network& net, const CommandStream& commands,
                         std::string_view device, double t) {
  const auto d = net.find_device(device);
  if (!d) throw InputError(InputError::Kind::dangling_reference, "unknown device", std::string(device));
  SwitchState st = net.switches()[*d].current_state;
  for (auto i : delivery_order(commands)) {
    const auto& c = commands[i];
    if (c.effective_time >= t) break;
    if (c.target != device) continue;
    if (const auto* s = std::get_if<SwitchState>(&c.action)) st = *s;
  }
  return st;
}

InverterControl replay_control(const Network& net, const CommandStream& commands,
                               std::string_view inverter, double t) {
  const auto i = net.find_inverter(inverter);
  if (!i) throw InputError(InputError::Kind::dangling_reference, "unknown inverter", std::string(inverter));
  InverterControl ctl = net.inverters()[*i].control;
  for (auto k : delivery_order(commands)) {
    const auto& c = commands[k];
    if (c.effective_time >= t) break;
    if (c.target != inverter) continue;
    if (const auto* s = std::get_if<InverterControl>(&c.action)) ctl = *s;
  }
  return ctl;
}

CommandStream apply_attack(const AttackScenario& scn, const CommandStream& commands,
                           const Network& net, double horizon) {
  validate_scenario(scn, net, horizon);
  const bool already = std::any_of(commands.begin(), commands.end(), [&](const CommandEvent& c) {
    return c.origin == Origin::attacker && c.scenario_id == scn.id;
  });
  if (already) return commands;

  CommandStream out;
  out.reserve(commands.size() + 2 * scn.targets.size());
  switch (scn.kind) {
    case AttackClass::data_tamper: {
      out = commands;
      for (const auto& id : scn.targets) {
        const auto restore = replay_control(net, commands, id, scn.t_end);
        out.push_back(attacker_command(scn, scn.t_start, id, scn.control));
        out.push_back(attacker_command(scn, scn.t_end, id, restore));
      }
      break;
    }
    case AttackClass::command_block: {
      for (const auto& c : commands) {
        const bool drop = c.origin == Origin::operator_ && targeted(scn, c.target) &&
                          in_window(scn, c.issue_time) && blocked_by(scn.block, c.action);
        if (!drop) out.push_back(c);
      }
      if (scn.forced)
        for (const auto& id : scn.targets) out.push_back(attacker_command(scn, scn.t_start, id, *scn.forced));
      for (const auto& id : scn.targets) {
        const auto want = replay_state(net, commands, id, scn.t_end);
        if (replay_state(net, out, id, scn.t_end) != want)
          out.push_back(attacker_command(scn, scn.t_end, id, want));
      }
      break;
    }
    case AttackClass::time_delay: {
      out = commands;
      for (auto& c : out)
        if (c.origin == Origin::operator_ && targeted(scn, c.target) && in_window(scn, c.issue_time))
          c.effective_time = c.issue_time + scn.delay;
      if (scn.transient) {
        const double back = scn.t_start + scn.transient->duration;
        for (const auto& id : scn.targets) {
          out.push_back(attacker_command(scn, scn.t_start, id, scn.transient->state));
          out.push_back(attacker_command(scn, back, id, replay_state(net, commands, id, back)));
        }
      }
      break;
    }
  }
  return out;
}

ScenarioRun run_scenario(const Network& net, const ProfileSet& profiles, const AttackScenario& scn,
                         const CommandStream& operator_commands, const RunSettings& run,
                         const SolverConfig& cfg) {
  ScenarioRun r;
  r.attacked_commands = apply_attack(scn, operator_commands, net, run.horizon);
  r.baseline = time_series_run(net, profiles, run, operator_commands, cfg);
  r.attacked = time_series_run(net, profiles, run, r.attacked_commands, cfg);
  return r;
}

}  // namespace tdsec
