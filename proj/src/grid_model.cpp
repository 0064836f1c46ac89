#include "tdsec/grid_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "tdsec/errors.hpp"
#include "tdsec/topology.hpp"
#include "yaml_util.hpp"

namespace tdsec {

using detail::enum_field;
using detail::fail_at;
using detail::optional_field;
using detail::optional_or;
using detail::record_id;
using detail::required;
using detail::sequence;

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

template <class E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [name, v] : table)
    if (name == s) return v;
  return std::nullopt;
}

template <class E, std::size_t N>
std::string_view name_of(E v, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [name, e] : table)
    if (e == v) return name;
  return "?";
}

constexpr std::pair<std::string_view, BusKind> kBusKinds[] = {
    {"transmission", BusKind::transmission}, {"distribution", BusKind::distribution}};
constexpr std::pair<std::string_view, BranchKind> kBranchKinds[] = {
    {"line", BranchKind::line}, {"transformer", BranchKind::transformer}};
constexpr std::pair<std::string_view, DeviceKind> kDeviceKinds[] = {
    {"cutout_switch", DeviceKind::cutout_switch},
    {"circuit_breaker", DeviceKind::circuit_breaker},
    {"recloser", DeviceKind::recloser}};
constexpr std::pair<std::string_view, SwitchState> kStates[] = {{"open", SwitchState::open},
                                                                {"closed", SwitchState::closed}};
constexpr std::pair<std::string_view, DeviceControl> kControls[] = {
    {"scada_controlled", DeviceControl::scada_controlled},
    {"local_only", DeviceControl::local_only}};
constexpr std::pair<std::string_view, InverterMode> kModes[] = {
    {"constant_pf", InverterMode::constant_pf},
    {"limit_p", InverterMode::limit_p},
    {"constant_q", InverterMode::constant_q}};
constexpr std::pair<std::string_view, Quantity> kQuantities[] = {
    {"voltage", Quantity::voltage},
    {"current", Quantity::current},
    {"device_state", Quantity::device_state}};

[[noreturn]] void invariant(std::string msg, std::string subject = {}, std::string context = {}) {
  throw InputError(InputError::Kind::invariant, std::move(msg), std::move(subject),
                   std::move(context));
}

[[noreturn]] void dangling(std::string_view what, const std::string& id,
                           const std::string& context) {
  throw InputError(InputError::Kind::dangling_reference,
                   "'" + context + "' references unknown " + std::string(what) + " '" + id + "'",
                   id, context);
}

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  std::string s(buf, end);
  // Keep numbers recognizable as floats to a reader.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

void emit_control(YAML::Emitter& out, const InverterControl& c) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(c.mode));
  out << YAML::Key << "pf" << YAML::Value << number(c.pf_setpoint);
  if (c.p_limit) out << YAML::Key << "p_limit" << YAML::Value << number(*c.p_limit);
  out << YAML::Key << "q_setpoint" << YAML::Value << number(c.q_setpoint);
  out << YAML::EndMap;
}

}  // namespace

namespace detail {

InverterControl parse_control(const YAML::Node& rec, const std::string& ctx) {
  InverterControl c;
  if (!rec || rec.IsNull()) return c;
  if (!rec.IsMap()) fail_at(rec, InputError::Kind::syntax, "control of '" + ctx + "' must be a mapping");
  c.mode = enum_field(rec, "mode", ctx, inverter_mode_from, "constant_pf|limit_p|constant_q");
  c.pf_setpoint = optional_or<double>(rec, "pf", 1.0, ctx);
  c.p_limit = optional_field<double>(rec, "p_limit", ctx);
  c.q_setpoint = optional_or<double>(rec, "q_setpoint", 0.0, ctx);
  if (auto why = control_problem(c)) fail_at(rec, InputError::Kind::invariant, ctx + ": " + *why, ctx, ctx);
  return c;
}

}  // namespace detail

bool MonitorPoint::observes(Quantity q) const {
  return std::find(quantities.begin(), quantities.end(), q) != quantities.end();
}

std::string_view to_string(BusKind v) { return name_of(v, kBusKinds); }
std::string_view to_string(BranchKind v) { return name_of(v, kBranchKinds); }
std::string_view to_string(DeviceKind v) { return name_of(v, kDeviceKinds); }
std::string_view to_string(SwitchState v) { return name_of(v, kStates); }
std::string_view to_string(DeviceControl v) { return name_of(v, kControls); }
std::string_view to_string(InverterMode v) { return name_of(v, kModes); }
std::string_view to_string(Quantity v) { return name_of(v, kQuantities); }

std::optional<SwitchState> switch_state_from(std::string_view s) { return lookup(s, kStates); }
std::optional<InverterMode> inverter_mode_from(std::string_view s) { return lookup(s, kModes); }

std::optional<std::string> control_problem(const InverterControl& c) {
  const double pf = c.pf_setpoint;
  if (!std::isfinite(pf) || std::abs(pf) > 1.0 || std::abs(pf) < 0.01)
    return "pf setpoint must lie in [-1, -0.01] or [0.01, 1]";
  if (c.p_limit && !(*c.p_limit >= 0.0)) return "p_limit must be >= 0";
  if (!std::isfinite(c.q_setpoint)) return "q_setpoint must be finite";
  if (c.mode == InverterMode::limit_p && !c.p_limit) return "limit_p mode requires p_limit";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing

NetworkData parse_network_data(std::string_view text) {
  const YAML::Node root = detail::load_yaml(text);
  if (!root.IsMap()) throw InputError(InputError::Kind::syntax, "network file must be a mapping");

  NetworkData d;
  detail::check_format_version(root, "network file", &d.format_version);
  d.base_power_va = optional_or<double>(root, "base_power_va", 1.0e6, "network");
  d.slack_bus = required<std::string>(root, "slack_bus", "network");
  d.slack_voltage_pu = optional_or<double>(root, "slack_voltage_pu", 1.0, "network");

  for (const auto& r : sequence(root, "buses")) {
    Bus b;
    b.id = record_id(r, "buses");
    b.kind = enum_field(r, "kind", b.id, [](std::string_view s) { return lookup(s, kBusKinds); },
                        "transmission|distribution");
    b.nominal_voltage = required<double>(r, "nominal_voltage", b.id);
    b.feeder_id = optional_or<std::string>(r, "feeder", "", b.id);
    d.buses.push_back(std::move(b));
  }
  for (const auto& r : sequence(root, "branches")) {
    Branch b;
    b.id = record_id(r, "branches");
    b.from_bus = required<std::string>(r, "from", b.id);
    b.to_bus = required<std::string>(r, "to", b.id);
    b.impedance_ohm = {required<double>(r, "r_ohm", b.id), required<double>(r, "x_ohm", b.id)};
    b.ampacity = required<double>(r, "ampacity", b.id);
    b.kind = optional_field<std::string>(r, "kind", b.id)
                 ? enum_field(r, "kind", b.id,
                              [](std::string_view s) { return lookup(s, kBranchKinds); },
                              "line|transformer")
                 : BranchKind::line;
    d.branches.push_back(std::move(b));
  }
  for (const auto& r : sequence(root, "switches")) {
    SwitchingDevice s;
    s.id = record_id(r, "switches");
    s.branch_id = required<std::string>(r, "branch", s.id);
    s.kind = enum_field(r, "kind", s.id, [](std::string_view v) { return lookup(v, kDeviceKinds); },
                        "cutout_switch|circuit_breaker|recloser");
    s.normal_state = enum_field(r, "normal_state", s.id, switch_state_from, "open|closed");
    s.current_state = r["current_state"]
                          ? enum_field(r, "current_state", s.id, switch_state_from, "open|closed")
                          : s.normal_state;
    s.control = r["control"] ? enum_field(r, "control", s.id,
                                          [](std::string_view v) { return lookup(v, kControls); },
                                          "scada_controlled|local_only")
                             : DeviceControl::scada_controlled;
    d.switches.push_back(std::move(s));
  }
  for (const auto& r : sequence(root, "loads")) {
    Load l;
    l.id = record_id(r, "loads");
    l.bus_id = required<std::string>(r, "bus", l.id);
    l.profile_id = required<std::string>(r, "profile", l.id);
    l.scale = optional_or<double>(r, "scale", 1.0, l.id);
    l.power_factor = optional_or<double>(r, "power_factor", 1.0, l.id);
    l.critical = optional_or<bool>(r, "critical", false, l.id);
    d.loads.push_back(std::move(l));
  }
  for (const auto& r : sequence(root, "inverters")) {
    Inverter inv;
    inv.id = record_id(r, "inverters");
    inv.bus_id = required<std::string>(r, "bus", inv.id);
    inv.s_rated = required<double>(r, "s_rated", inv.id);
    inv.profile_id = required<std::string>(r, "profile", inv.id);
    inv.scale = optional_or<double>(r, "scale", 1.0, inv.id);
    inv.control = detail::parse_control(r["control"], inv.id);
    d.inverters.push_back(std::move(inv));
  }
  for (const auto& r : sequence(root, "monitor_points")) {
    MonitorPoint mp;
    mp.id = record_id(r, "monitor_points");
    mp.bus_id = required<std::string>(r, "bus", mp.id);
    mp.sampling_interval = required<double>(r, "sampling_interval", mp.id);
    mp.phase_offset = optional_or<double>(r, "phase_offset", 0.0, mp.id);
    const YAML::Node q = r["quantities"];
    if (!q) {
      mp.quantities = {Quantity::voltage, Quantity::current, Quantity::device_state};
    } else {
      if (!q.IsSequence()) fail_at(q, InputError::Kind::syntax, mp.id + ": quantities must be a list");
      for (const auto& e : q) {
        const auto s = e.as<std::string>();
        auto v = lookup(s, kQuantities);
        if (!v)
          fail_at(e, InputError::Kind::syntax,
                  "invalid quantity '" + s + "' (expected voltage|current|device_state)", s, mp.id);
        mp.quantities.push_back(*v);
      }
      std::sort(mp.quantities.begin(), mp.quantities.end());
      mp.quantities.erase(std::unique(mp.quantities.begin(), mp.quantities.end()),
                          mp.quantities.end());
    }
    d.monitor_points.push_back(std::move(mp));
  }
  for (const auto& r : sequence(root, "boundary")) {
    if (!r.IsMap()) fail_at(r, InputError::Kind::syntax, "boundary entries must be mappings");
    BoundaryLink b;
    b.transmission_bus = required<std::string>(r, "transmission", "boundary");
    b.head_bus = required<std::string>(r, "head", "boundary");
    d.boundary.push_back(std::move(b));
  }
  if (const YAML::Node p = root["profiles_ref"]; p && !p.IsNull()) {
    if (!p.IsMap()) fail_at(p, InputError::Kind::syntax, "profiles_ref must be a mapping");
    for (const auto& kv : p) d.profiles_ref[kv.first.as<std::string>()] = kv.second.as<std::string>();
  }
  return d;
}

Network parse_network(std::string_view text) {
  NetworkData data = parse_network_data(text);
  try {
    return Network(std::move(data));
  } catch (const InputError& e) {
    if (e.line() > 0 || e.context().empty()) throw;
    // Attach the position of the offending record.
    const YAML::Node root = detail::load_yaml(text);
    for (const char* section : {"buses", "branches", "switches", "loads", "inverters",
                                "monitor_points"}) {
      for (const auto& r : sequence(root, section)) {
        if (r.IsMap() && r["id"] && r["id"].as<std::string>() == e.context())
          throw InputError(e.kind(), e.what(), e.subject(), e.context(), detail::line_of(r),
                           detail::column_of(r));
      }
    }
    throw;
  }
}

Network load_network(const std::string& path) { return parse_network(detail::read_text_file(path)); }

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_network(const NetworkData& d) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "format_version" << YAML::Value << YAML::DoubleQuoted << d.format_version;
  out << YAML::Key << "base_power_va" << YAML::Value << number(d.base_power_va);
  out << YAML::Key << "slack_bus" << YAML::Value << d.slack_bus;
  out << YAML::Key << "slack_voltage_pu" << YAML::Value << number(d.slack_voltage_pu);

  out << YAML::Key << "buses" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : d.buses) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << b.id;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(b.kind));
    out << YAML::Key << "nominal_voltage" << YAML::Value << number(b.nominal_voltage);
    if (!b.feeder_id.empty()) out << YAML::Key << "feeder" << YAML::Value << b.feeder_id;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "branches" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : d.branches) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << b.id;
    out << YAML::Key << "from" << YAML::Value << b.from_bus;
    out << YAML::Key << "to" << YAML::Value << b.to_bus;
    out << YAML::Key << "r_ohm" << YAML::Value << number(b.impedance_ohm.real());
    out << YAML::Key << "x_ohm" << YAML::Value << number(b.impedance_ohm.imag());
    out << YAML::Key << "ampacity" << YAML::Value << number(b.ampacity);
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(b.kind));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "switches" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : d.switches) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << s.id;
    out << YAML::Key << "branch" << YAML::Value << s.branch_id;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(s.kind));
    out << YAML::Key << "normal_state" << YAML::Value << std::string(to_string(s.normal_state));
    out << YAML::Key << "current_state" << YAML::Value << std::string(to_string(s.current_state));
    out << YAML::Key << "control" << YAML::Value << std::string(to_string(s.control));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "loads" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : d.loads) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << l.id;
    out << YAML::Key << "bus" << YAML::Value << l.bus_id;
    out << YAML::Key << "profile" << YAML::Value << l.profile_id;
    out << YAML::Key << "scale" << YAML::Value << number(l.scale);
    out << YAML::Key << "power_factor" << YAML::Value << number(l.power_factor);
    out << YAML::Key << "critical" << YAML::Value << l.critical;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "inverters" << YAML::Value << YAML::BeginSeq;
  for (const auto& inv : d.inverters) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << inv.id;
    out << YAML::Key << "bus" << YAML::Value << inv.bus_id;
    out << YAML::Key << "s_rated" << YAML::Value << number(inv.s_rated);
    out << YAML::Key << "profile" << YAML::Value << inv.profile_id;
    out << YAML::Key << "scale" << YAML::Value << number(inv.scale);
    out << YAML::Key << "control" << YAML::Value;
    emit_control(out, inv.control);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "monitor_points" << YAML::Value << YAML::BeginSeq;
  for (const auto& mp : d.monitor_points) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << mp.id;
    out << YAML::Key << "bus" << YAML::Value << mp.bus_id;
    out << YAML::Key << "sampling_interval" << YAML::Value << number(mp.sampling_interval);
    out << YAML::Key << "phase_offset" << YAML::Value << number(mp.phase_offset);
    out << YAML::Key << "quantities" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto q : mp.quantities) out << std::string(to_string(q));
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "boundary" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : d.boundary) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "transmission" << YAML::Value << b.transmission_bus;
    out << YAML::Key << "head" << YAML::Value << b.head_bus;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "profiles_ref" << YAML::Value << YAML::BeginMap;
  for (const auto& [id, path] : d.profiles_ref) out << YAML::Key << id << YAML::Value << path;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Network

Network::Network(NetworkData data) : data_(std::move(data)) {
  index_and_check();
  build_feeders();
}

namespace {

template <class M>
std::optional<std::size_t> find_in(const M& m, std::string_view id) {
  auto it = m.find(id);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

template <class T, class M>
void index_unique(const std::vector<T>& items, M& ix, std::string_view what) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id.empty()) invariant(std::string(what) + " with empty id");
    if (!ix.emplace(items[i].id, i).second)
      throw InputError(InputError::Kind::duplicate_id,
                       "duplicate " + std::string(what) + " id '" + items[i].id + "'", items[i].id,
                       items[i].id);
  }
}

}  // namespace

std::optional<std::size_t> Network::find_bus(std::string_view id) const { return find_in(bus_ix_, id); }
std::optional<std::size_t> Network::find_branch(std::string_view id) const { return find_in(branch_ix_, id); }
std::optional<std::size_t> Network::find_device(std::string_view id) const { return find_in(device_ix_, id); }
std::optional<std::size_t> Network::find_load(std::string_view id) const { return find_in(load_ix_, id); }
std::optional<std::size_t> Network::find_inverter(std::string_view id) const { return find_in(inverter_ix_, id); }
std::optional<std::size_t> Network::find_monitor_point(std::string_view id) const { return find_in(mp_ix_, id); }
std::optional<std::size_t> Network::find_feeder(std::string_view id) const { return find_in(feeder_ix_, id); }

void Network::index_and_check() {
  const auto& d = data_;
  if (!(d.base_power_va > 0.0)) invariant("base_power_va must be > 0");
  if (!(d.slack_voltage_pu > 0.0)) invariant("slack_voltage_pu must be > 0");

  index_unique(d.buses, bus_ix_, "bus");
  index_unique(d.branches, branch_ix_, "branch");
  index_unique(d.switches, device_ix_, "switching device");
  index_unique(d.loads, load_ix_, "load");
  index_unique(d.inverters, inverter_ix_, "inverter");
  index_unique(d.monitor_points, mp_ix_, "monitor point");
  for (const auto& inv : d.inverters)
    if (device_ix_.count(inv.id))
      throw InputError(InputError::Kind::duplicate_id,
                       "id '" + inv.id + "' used by both an inverter and a switching device",
                       inv.id, inv.id);

  for (const auto& b : d.buses) {
    if (!(b.nominal_voltage > 0.0)) invariant("bus '" + b.id + "': nominal_voltage must be > 0", b.id, b.id);
    if (b.kind == BusKind::distribution && b.feeder_id.empty())
      invariant("distribution bus '" + b.id + "' must name its feeder", b.id, b.id);
    if (b.kind == BusKind::transmission && !b.feeder_id.empty())
      invariant("transmission bus '" + b.id + "' cannot belong to a feeder", b.id, b.id);
  }

  auto bus_ref = [&](const std::string& id, const std::string& ctx) {
    auto ix = find_bus(id);
    if (!ix) dangling("bus", id, ctx);
    return *ix;
  };

  {
    auto s = find_bus(d.slack_bus);
    if (!s) dangling("bus", d.slack_bus, "slack_bus");
    if (d.buses[*s].kind != BusKind::transmission)
      invariant("slack bus '" + d.slack_bus + "' must be a transmission bus", d.slack_bus);
    slack_ = *s;
  }

  // Feeders are defined by the boundary links.
  std::map<std::string, std::size_t> head_of_feeder;
  for (const auto& link : d.boundary) {
    const auto t = bus_ref(link.transmission_bus, "boundary");
    const auto h = bus_ref(link.head_bus, "boundary");
    if (d.buses[t].kind != BusKind::transmission)
      invariant("boundary bus '" + link.transmission_bus + "' must be a transmission bus",
                link.transmission_bus);
    if (d.buses[h].kind != BusKind::distribution)
      invariant("feeder head '" + link.head_bus + "' must be a distribution bus", link.head_bus);
    const auto& fid = d.buses[h].feeder_id;
    if (feeder_ix_.count(fid))
      invariant("feeder '" + fid + "' has more than one boundary link", fid);
    feeder_ix_.emplace(fid, feeders_.size());
    Feeder f;
    f.id = fid;
    f.root = t;
    f.head = h;
    feeders_.push_back(std::move(f));
  }

  bus_feeder_.assign(d.buses.size(), std::nullopt);
  for (std::size_t i = 0; i < d.buses.size(); ++i) {
    const auto& b = d.buses[i];
    if (b.kind != BusKind::distribution) continue;
    auto f = find_feeder(b.feeder_id);
    if (!f) invariant("feeder '" + b.feeder_id + "' of bus '" + b.id + "' has no boundary link",
                      b.feeder_id, b.id);
    bus_feeder_[i] = *f;
    feeders_[*f].buses.push_back(i);
  }

  const std::size_t nb = d.branches.size();
  branch_from_.resize(nb);
  branch_to_.resize(nb);
  z_pu_.resize(nb);
  i_base_.resize(nb);
  branch_device_.assign(nb, std::nullopt);
  incident_.assign(d.buses.size(), {});
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& br = d.branches[k];
    const auto f = bus_ref(br.from_bus, br.id);
    const auto t = bus_ref(br.to_bus, br.id);
    if (f == t) invariant("branch '" + br.id + "' connects bus '" + br.from_bus + "' to itself", br.id, br.id);
    if (!(br.ampacity > 0.0)) invariant("branch '" + br.id + "': ampacity must be > 0", br.id, br.id);
    if (!(std::abs(br.impedance_ohm) > 0.0))
      invariant("branch '" + br.id + "': impedance must be nonzero", br.id, br.id);
    const auto& bf = d.buses[f];
    const auto& bt = d.buses[t];
    if (bf.kind != bt.kind) {
      // Only the substation connection of a feeder may cross levels.
      const auto dist = bf.kind == BusKind::distribution ? f : t;
      const auto tran = bf.kind == BusKind::transmission ? f : t;
      const auto& fd = feeders_[*bus_feeder_[dist]];
      if (fd.root != tran || fd.head != dist)
        invariant("branch '" + br.id +
                      "' joins transmission and distribution outside a boundary link",
                  br.id, br.id);
      feeders_[*bus_feeder_[dist]].branches.push_back(k);
    } else if (bf.kind == BusKind::distribution) {
      if (bf.feeder_id != bt.feeder_id)
        invariant("branch '" + br.id + "' joins feeders '" + bf.feeder_id + "' and '" +
                      bt.feeder_id + "'",
                  br.id, br.id);
      feeders_[*bus_feeder_[f]].branches.push_back(k);
    }
    branch_from_[k] = f;
    branch_to_[k] = t;
    const double v = bf.nominal_voltage;
    z_pu_[k] = br.impedance_ohm / (v * v / d.base_power_va);
    i_base_[k] = d.base_power_va / v;
    incident_[f].push_back(k);
    incident_[t].push_back(k);
  }

  device_branch_.resize(d.switches.size());
  for (std::size_t i = 0; i < d.switches.size(); ++i) {
    const auto& s = d.switches[i];
    auto br = find_branch(s.branch_id);
    if (!br) dangling("branch", s.branch_id, s.id);
    if (branch_device_[*br])
      invariant("branch '" + s.branch_id + "' hosts more than one switching device ('" +
                    d.switches[*branch_device_[*br]].id + "' and '" + s.id + "')",
                s.branch_id, s.id);
    branch_device_[*br] = i;
    device_branch_[i] = *br;
  }

  load_bus_.resize(d.loads.size());
  for (std::size_t i = 0; i < d.loads.size(); ++i) {
    const auto& l = d.loads[i];
    load_bus_[i] = bus_ref(l.bus_id, l.id);
    if (!(l.power_factor > 0.0 && l.power_factor <= 1.0))
      invariant("load '" + l.id + "': power_factor must lie in (0, 1]", l.id, l.id);
    if (!(l.scale >= 0.0)) invariant("load '" + l.id + "': scale must be >= 0", l.id, l.id);
    if (!d.profiles_ref.count(l.profile_id)) dangling("profile", l.profile_id, l.id);
  }
  inverter_bus_.resize(d.inverters.size());
  for (std::size_t i = 0; i < d.inverters.size(); ++i) {
    const auto& inv = d.inverters[i];
    inverter_bus_[i] = bus_ref(inv.bus_id, inv.id);
    if (!(inv.s_rated > 0.0)) invariant("inverter '" + inv.id + "': s_rated must be > 0", inv.id, inv.id);
    if (!(inv.scale >= 0.0)) invariant("inverter '" + inv.id + "': scale must be >= 0", inv.id, inv.id);
    if (!d.profiles_ref.count(inv.profile_id)) dangling("profile", inv.profile_id, inv.id);
    if (auto why = control_problem(inv.control)) invariant("inverter '" + inv.id + "': " + *why, inv.id, inv.id);
  }
  mp_bus_.resize(d.monitor_points.size());
  for (std::size_t i = 0; i < d.monitor_points.size(); ++i) {
    const auto& mp = d.monitor_points[i];
    mp_bus_[i] = bus_ref(mp.bus_id, mp.id);
    if (!(mp.sampling_interval > 0.0))
      invariant("monitor point '" + mp.id + "': sampling_interval must be > 0", mp.id, mp.id);
    if (!(mp.phase_offset >= 0.0 && mp.phase_offset < mp.sampling_interval))
      invariant("monitor point '" + mp.id + "': phase_offset must lie in [0, sampling_interval)",
                mp.id, mp.id);
  }
}

void Network::build_feeders() {
  const auto normal = normal_states();
  normal_parent_branch_.assign(data_.buses.size(), npos);
  for (std::size_t fi = 0; fi < feeders_.size(); ++fi) {
    auto& f = feeders_[fi];
    std::sort(f.branches.begin(), f.branches.end());
    auto cycle = find_feeder_cycle(*this, fi, normal);
    if (!cycle.empty()) {
      std::string path;
      for (const auto& b : cycle) path += (path.empty() ? "" : " -> ") + b;
      invariant("feeder '" + f.id + "' is not radial in normal state; cycle: " + path + " -> " +
                    cycle.front(),
                f.id);
    }
    // BFS from the root over closed feeder branches.
    std::vector<bool> seen(data_.buses.size(), false);
    std::deque<std::size_t> queue{f.root};
    seen[f.root] = true;
    std::size_t reached = 0;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (auto k : incident_[u]) {
        if (!closed(k, normal)) continue;
        if (!std::binary_search(f.branches.begin(), f.branches.end(), k)) continue;
        const auto v = branch_from_[k] == u ? branch_to_[k] : branch_from_[k];
        if (seen[v]) continue;
        seen[v] = true;
        normal_parent_branch_[v] = k;
        ++reached;
        queue.push_back(v);
      }
    }
    if (reached != f.buses.size()) {
      for (auto b : f.buses)
        if (!seen[b])
          invariant("feeder '" + f.id + "' is not connected in normal state; bus '" +
                        data_.buses[b].id + "' is unreachable from '" + data_.buses[f.root].id + "'",
                    data_.buses[b].id);
    }
  }
}

std::vector<SwitchState> Network::current_states() const {
  std::vector<SwitchState> s;
  s.reserve(data_.switches.size());
  for (const auto& d : data_.switches) s.push_back(d.current_state);
  return s;
}

std::vector<SwitchState> Network::normal_states() const {
  std::vector<SwitchState> s;
  s.reserve(data_.switches.size());
  for (const auto& d : data_.switches) s.push_back(d.normal_state);
  return s;
}

std::vector<InverterControl> Network::initial_controls() const {
  std::vector<InverterControl> c;
  c.reserve(data_.inverters.size());
  for (const auto& inv : data_.inverters) c.push_back(inv.control);
  return c;
}

bool Network::closed(std::size_t branch, const std::vector<SwitchState>& states) const {
  const auto dev = branch_device_[branch];
  return !dev || states[*dev] == SwitchState::closed;
}

std::vector<std::size_t> Network::upstream_path(std::size_t bus) const {
  std::vector<std::size_t> path;
  auto b = bus;
  while (normal_parent_branch_[b] != npos) {
    const auto k = normal_parent_branch_[b];
    path.push_back(k);
    b = branch_from_[k] == b ? branch_to_[k] : branch_from_[k];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace tdsec
