#include "tdsec/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdsec/errors.hpp"

namespace tdsec {

std::string_view to_string(Origin o) { return o == Origin::attacker ? "attacker" : "operator"; }

CommandEvent operator_command(double time, std::string target, CommandAction action) {
  CommandEvent e;
  e.issue_time = time;
  e.effective_time = time;
  e.target = std::move(target);
  e.action = std::move(action);
  e.origin = Origin::operator_;
  return e;
}

std::vector<std::size_t> delivery_order(const CommandStream& commands) {
  std::vector<std::size_t> order(commands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = commands[a];
    const auto& y = commands[b];
    if (x.effective_time != y.effective_time) return x.effective_time < y.effective_time;
    const int rx = x.origin == Origin::attacker ? 0 : 1;
    const int ry = y.origin == Origin::attacker ? 0 : 1;
    return rx < ry;
  });
  return order;
}

void validate_commands(const Network& net, const CommandStream& commands) {
  for (const auto& c : commands) {
    if (!std::isfinite(c.issue_time) || c.issue_time < 0.0 || c.effective_time < c.issue_time)
      throw InputError(InputError::Kind::invariant,
                       "command for '" + c.target + "' has invalid timing", c.target);
    if (std::holds_alternative<SwitchState>(c.action)) {
      const auto d = net.find_device(c.target);
      if (!d)
        throw InputError(InputError::Kind::dangling_reference,
                         "switch command targets unknown device '" + c.target + "'", c.target);
      if (net.switches()[*d].control != DeviceControl::scada_controlled)
        throw InputError(InputError::Kind::invariant,
                         "device '" + c.target + "' is local_only and accepts no remote commands",
                         c.target);
    } else {
      if (!net.find_inverter(c.target))
        throw InputError(InputError::Kind::dangling_reference,
                         "control command targets unknown inverter '" + c.target + "'", c.target);
      if (auto why = control_problem(std::get<InverterControl>(c.action)))
        throw InputError(InputError::Kind::invariant, "command for '" + c.target + "': " + *why,
                         c.target);
    }
  }
}

}  // namespace tdsec
