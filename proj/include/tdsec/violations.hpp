#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdsec/attack.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/power_flow.hpp"

namespace tdsec {

enum class ViolationType { overvoltage, undervoltage, overcurrent, overpower, loss_of_supply };
inline constexpr std::size_t violation_type_count = 5;
inline constexpr std::array<ViolationType, violation_type_count> all_violation_types{
    ViolationType::overvoltage, ViolationType::undervoltage, ViolationType::overcurrent,
    ViolationType::overpower, ViolationType::loss_of_supply};

std::string_view to_string(ViolationType t);

/// Relative slack applied when comparing against a limit, so values that
/// sit on the limit up to rounding are legal.
inline constexpr double limit_slack = 1e-9;

struct LimitSet {
  double voltage_band = 0.05;
  std::vector<double> nominal_voltage;  ///< per bus, volts
  std::vector<double> ampacity;         ///< per branch, amperes
  std::vector<double> inverter_rating;  ///< per inverter, VA
  bool count_unserved_as_violation = true;

  static LimitSet from_network(const Network& net, double voltage_band = 0.05,
                               bool count_unserved = true);
  /// Throws InputError(invariant) unless 0 < voltage_band < 1.
  void validate() const;
};

/// Lower and upper voltage limits in volts.
struct VoltageLimits {
  double low = 0.0;
  double high = 0.0;
};
VoltageLimits voltage_limits(double nominal_v, double band);

/// Voltage records carry per-unit values, overcurrent amperes, overpower
/// VA and loss_of_supply the unserved demand in watts against a limit of 0.
struct ViolationRecord {
  std::size_t timestep = 0;
  std::string component;
  ViolationType type = ViolationType::overvoltage;
  double observed = 0.0;
  double limit = 0.0;

  bool operator==(const ViolationRecord&) const = default;
};

/// Failed steps produce no records.
std::vector<ViolationRecord> check_violations(const Network& net, const SystemSolution& sol,
                                              const LimitSet& limits);

using TypeCounts = std::array<std::size_t, violation_type_count>;

struct ViolationCounts {
  std::vector<ViolationRecord> records;
  std::vector<std::size_t> per_step;
  std::vector<TypeCounts> per_step_by_type;
  TypeCounts by_type{};
  std::size_t total = 0;
};

ViolationCounts count_timeline(const Network& net, const Timeline& tl, const LimitSet& limits);

struct ViolationDelta {
  ViolationCounts baseline;
  ViolationCounts attacked;
  std::vector<long long> per_step;
  std::array<long long, violation_type_count> by_type{};
  long long total = 0;
};

/// Both timelines must have the same number of steps.
ViolationDelta compare_timelines(const Network& net, const Timeline& baseline,
                                 const Timeline& attacked, const LimitSet& limits);

/// Per-unit impedance of the shortest path from the slack bus to each bus
/// over branches closed in the normal state; infinity when unreachable.
std::vector<double> bus_electrical_distance(const Network& net);
/// Distance of the nearer end of the device's branch.
double electrical_distance(const Network& net, std::size_t device);

struct CriticalityEntry {
  std::string device_id;
  long long violation_count = 0;  ///< attacked total minus baseline total
  double electrical_distance = 0.0;
  std::size_t baseline_total = 0;
  std::size_t attacked_total = 0;
  TypeCounts attacked_by_type{};
  std::optional<std::string> failure;
};

struct SweepSettings {
  /// Forced-open window; a negative end means the horizon.
  double t_start = 0.0;
  double t_end = -1.0;
  unsigned workers = 1;
};

struct SweepResult {
  /// Successful entries, highest count first.
  std::vector<CriticalityEntry> ranked;
  /// Devices whose attacked run failed, in input order.
  std::vector<CriticalityEntry> failed;
};

/// Runs "block every command and force open" on each device and ranks by
/// the change in violation count. Ties: nearer device first, then id.
SweepResult criticality_sweep(const Network& net, const ProfileSet& profiles,
                              const CommandStream& operator_commands,
                              const std::vector<std::string>& device_ids, const RunSettings& run,
                              const SolverConfig& cfg, const LimitSet& limits,
                              const SweepSettings& sweep = {});

/// Scenario the sweep uses for one device.
AttackScenario sweep_scenario(const std::string& device_id, double t_start, double t_end);

}  // namespace tdsec
