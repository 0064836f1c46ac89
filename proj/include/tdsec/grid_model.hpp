#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdsec {

using Complex = std::complex<double>;

enum class BusKind { transmission, distribution };
enum class BranchKind { line, transformer };
enum class DeviceKind { cutout_switch, circuit_breaker, recloser };
enum class SwitchState { open, closed };
enum class DeviceControl { scada_controlled, local_only };
enum class InverterMode { constant_pf, limit_p, constant_q };
enum class Quantity { voltage, current, device_state };

struct Bus {
  std::string id;
  BusKind kind = BusKind::distribution;
  /// Line-to-neutral volts.
  double nominal_voltage = 0.0;
  /// Empty for transmission buses.
  std::string feeder_id;

  bool operator==(const Bus&) const = default;
};

/// Series element. Impedance and ampacity are referred to the from-bus side.
struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  Complex impedance_ohm;
  double ampacity = 0.0;
  BranchKind kind = BranchKind::line;

  bool operator==(const Branch&) const = default;
};

struct SwitchingDevice {
  std::string id;
  std::string branch_id;
  DeviceKind kind = DeviceKind::cutout_switch;
  SwitchState normal_state = SwitchState::closed;
  SwitchState current_state = SwitchState::closed;
  DeviceControl control = DeviceControl::scada_controlled;

  bool operator==(const SwitchingDevice&) const = default;
};

/// Constant-power load; demand(t) = scale * profile(t) watts.
struct Load {
  std::string id;
  std::string bus_id;
  std::string profile_id;
  double scale = 1.0;
  double power_factor = 1.0;
  bool critical = false;

  bool operator==(const Load&) const = default;
};

struct InverterControl {
  InverterMode mode = InverterMode::constant_pf;
  /// Signed: positive injects vars, negative absorbs.
  double pf_setpoint = 1.0;
  /// Active-power cap in watts. Required by limit_p; caps P in the other
  /// modes when present.
  std::optional<double> p_limit;
  double q_setpoint = 0.0;

  bool operator==(const InverterControl&) const = default;
};

/// available(t) = scale * profile(t) watts.
struct Inverter {
  std::string id;
  std::string bus_id;
  double s_rated = 0.0;
  std::string profile_id;
  double scale = 1.0;
  InverterControl control;

  bool operator==(const Inverter&) const = default;
};

struct MonitorPoint {
  std::string id;
  std::string bus_id;
  double sampling_interval = 900.0;
  double phase_offset = 0.0;
  /// Sorted, unique.
  std::vector<Quantity> quantities;

  bool operator==(const MonitorPoint&) const = default;
  bool observes(Quantity q) const;
};

struct BoundaryLink {
  std::string transmission_bus;
  std::string head_bus;

  bool operator==(const BoundaryLink&) const = default;
};

/// Plain contents of a network file, before validation.
struct NetworkData {
  std::string format_version = "1.0";
  double base_power_va = 1.0e6;
  std::string slack_bus;
  double slack_voltage_pu = 1.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<SwitchingDevice> switches;
  std::vector<Load> loads;
  std::vector<Inverter> inverters;
  std::vector<MonitorPoint> monitor_points;
  std::vector<BoundaryLink> boundary;
  /// profile id -> CSV path, relative to the network file's directory.
  std::map<std::string, std::string> profiles_ref;

  bool operator==(const NetworkData&) const = default;
};

/// A feeder together with the transmission bus it hangs from.
struct Feeder {
  std::string id;
  std::size_t root = 0;  ///< transmission boundary bus
  std::size_t head = 0;  ///< first distribution bus
  std::vector<std::size_t> buses;     ///< distribution buses, sorted by index
  std::vector<std::size_t> branches;  ///< including the root-head branch(es)
};

/// Validated, immutable network with index lookups and per-unit data.
class Network {
public:
  /// Throws InputError on dangling references, duplicate ids or any
  /// invariant breach (including a non-radial feeder in normal state).
  explicit Network(NetworkData data);

  const NetworkData& data() const noexcept { return data_; }
  const std::vector<Bus>& buses() const noexcept { return data_.buses; }
  const std::vector<Branch>& branches() const noexcept { return data_.branches; }
  const std::vector<SwitchingDevice>& switches() const noexcept { return data_.switches; }
  const std::vector<Load>& loads() const noexcept { return data_.loads; }
  const std::vector<Inverter>& inverters() const noexcept { return data_.inverters; }
  const std::vector<MonitorPoint>& monitor_points() const noexcept { return data_.monitor_points; }
  const std::vector<Feeder>& feeders() const noexcept { return feeders_; }

  double base_power() const noexcept { return data_.base_power_va; }
  std::size_t slack() const noexcept { return slack_; }

  std::optional<std::size_t> find_bus(std::string_view id) const;
  std::optional<std::size_t> find_branch(std::string_view id) const;
  std::optional<std::size_t> find_device(std::string_view id) const;
  std::optional<std::size_t> find_load(std::string_view id) const;
  std::optional<std::size_t> find_inverter(std::string_view id) const;
  std::optional<std::size_t> find_monitor_point(std::string_view id) const;
  std::optional<std::size_t> find_feeder(std::string_view id) const;

  /// Endpoints of a branch as bus indices.
  std::size_t from_bus(std::size_t branch) const { return branch_from_[branch]; }
  std::size_t to_bus(std::size_t branch) const { return branch_to_[branch]; }
  Complex impedance_pu(std::size_t branch) const { return z_pu_[branch]; }
  /// Amperes per unit of branch current (from-bus side).
  double current_base(std::size_t branch) const { return i_base_[branch]; }
  std::optional<std::size_t> device_on(std::size_t branch) const { return branch_device_[branch]; }
  std::size_t device_branch(std::size_t device) const { return device_branch_[device]; }
  std::optional<std::size_t> feeder_of(std::size_t bus) const { return bus_feeder_[bus]; }
  std::size_t load_bus(std::size_t load) const { return load_bus_[load]; }
  std::size_t inverter_bus(std::size_t inverter) const { return inverter_bus_[inverter]; }
  std::size_t monitor_bus(std::size_t mp) const { return mp_bus_[mp]; }
  /// Branch indices incident to a bus.
  const std::vector<std::size_t>& incident(std::size_t bus) const { return incident_[bus]; }

  std::vector<SwitchState> current_states() const;
  std::vector<SwitchState> normal_states() const;
  std::vector<InverterControl> initial_controls() const;

  /// Branch closed under the given device states (branches without a
  /// device are always closed).
  bool closed(std::size_t branch, const std::vector<SwitchState>& states) const;

  /// Branch path from the feeder root down to `bus` in normal topology
  /// (empty for transmission buses), ordered root first.
  std::vector<std::size_t> upstream_path(std::size_t bus) const;

  bool operator==(const Network& other) const { return data_ == other.data_; }

private:
  NetworkData data_;
  std::size_t slack_ = 0;
  std::vector<Feeder> feeders_;
  std::map<std::string, std::size_t, std::less<>> bus_ix_, branch_ix_, device_ix_,
      load_ix_, inverter_ix_, mp_ix_, feeder_ix_;
  std::vector<std::size_t> branch_from_, branch_to_;
  std::vector<Complex> z_pu_;
  std::vector<double> i_base_;
  std::vector<std::optional<std::size_t>> branch_device_;
  std::vector<std::size_t> device_branch_;
  std::vector<std::optional<std::size_t>> bus_feeder_;
  std::vector<std::size_t> load_bus_, inverter_bus_, mp_bus_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> normal_parent_branch_;  // per bus; npos for roots

  void index_and_check();
  void build_feeders();
};

/// Parses network-file text. Errors carry 1-based line/column when known.
NetworkData parse_network_data(std::string_view text);
Network parse_network(std::string_view text);
/// Reads a file; InputError(io) when it cannot be opened.
Network load_network(const std::string& path);

/// Canonical text form; parse_network(serialize_network(n)) == n.
std::string serialize_network(const NetworkData& data);

std::string_view to_string(BusKind v);
std::string_view to_string(BranchKind v);
std::string_view to_string(DeviceKind v);
std::string_view to_string(SwitchState v);
std::string_view to_string(DeviceControl v);
std::string_view to_string(InverterMode v);
std::string_view to_string(Quantity v);

std::optional<SwitchState> switch_state_from(std::string_view s);
std::optional<InverterMode> inverter_mode_from(std::string_view s);

/// Checks InverterControl field ranges; returns a message when invalid.
std::optional<std::string> control_problem(const InverterControl& c);

}  // namespace tdsec
