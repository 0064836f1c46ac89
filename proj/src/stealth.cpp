#include "tdsec/stealth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdsec/errors.hpp"

namespace tdsec {

std::vector<double> sample_instants(const MonitorPoint& mp, double horizon) {
  std::vector<double> out;
  if (!(mp.sampling_interval > 0.0)) return out;
  for (std::size_t k = 0;; ++k) {
    const double s = mp.phase_offset + static_cast<double>(k) * mp.sampling_interval;
    if (s > horizon) break;
    if (s >= 0.0) out.push_back(s);
  }
  return out;
}

namespace {

std::string number(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

ObservedSeries sample(const Network& net, const MonitorPoint& mp, const Timeline& tl) {
  ObservedSeries s;
  s.mp_id = mp.id;
  s.sample_times = sample_instants(mp, tl.horizon);
  const std::size_t bus = *net.find_bus(mp.bus_id);
  const auto path = net.upstream_path(bus);
  std::vector<std::size_t> devices;
  for (auto k : path)
    if (auto d = net.device_on(k)) devices.push_back(*d);
  const std::optional<std::size_t> feeding =
      path.empty() ? std::nullopt : std::optional<std::size_t>(path.back());
  if (feeding) s.ampacity = net.branches()[*feeding].ampacity;

  const bool v = mp.observes(Quantity::voltage);
  const bool c = mp.observes(Quantity::current) && feeding;
  const bool st = mp.observes(Quantity::device_state);
  for (double t : s.sample_times) {
    if (tl.steps.empty()) break;
    const auto& sol = tl.steps[tl.step_at(t)];
    if (v) s.voltage_pu.push_back(std::abs(sol.bus_voltage_pu[bus]));
    if (c) s.current_a.push_back(std::abs(sol.branch_current_a[*feeding]));
    if (st) {
      std::string sig;
      for (auto d : devices) {
        if (!sig.empty()) sig += ',';
        sig += net.switches()[d].id;
        sig += '=';
        sig += to_string(sol.device_states[d]);
      }
      sig += sol.energized[bus] ? "|energized" : "|deenergized";
      s.device_state.push_back(std::move(sig));
    }
  }
  return s;
}

DetectionVerdict detect_event(const ObservedSeries& baseline, const ObservedSeries& attacked,
                              const DetectionThresholds& thresholds) {
  if (baseline.mp_id != attacked.mp_id || baseline.sample_times != attacked.sample_times ||
      baseline.voltage_pu.size() != attacked.voltage_pu.size() ||
      baseline.current_a.size() != attacked.current_a.size() ||
      baseline.device_state.size() != attacked.device_state.size())
    throw InputError(InputError::Kind::invariant,
                     "series of '" + baseline.mp_id + "' and '" + attacked.mp_id +
                         "' are not sampled on the same grid");
  DetectionVerdict v;
  const double i_tol = thresholds.current_fraction * baseline.ampacity;
  for (std::size_t k = 0; k < baseline.sample_times.size(); ++k) {
    const double t = baseline.sample_times[k];
    if (!baseline.device_state.empty() && baseline.device_state[k] != attacked.device_state[k])
      v.witnesses.push_back({t, Quantity::device_state, baseline.device_state[k],
                             attacked.device_state[k]});
    if (!baseline.voltage_pu.empty() &&
        std::abs(baseline.voltage_pu[k] - attacked.voltage_pu[k]) > thresholds.voltage_pu)
      v.witnesses.push_back({t, Quantity::voltage, number(baseline.voltage_pu[k]),
                             number(attacked.voltage_pu[k])});
    if (!baseline.current_a.empty() &&
        std::abs(baseline.current_a[k] - attacked.current_a[k]) > i_tol)
      v.witnesses.push_back(
          {t, Quantity::current, number(baseline.current_a[k]), number(attacked.current_a[k])});
  }
  v.detected = !v.witnesses.empty();
  if (v.detected) v.first_detection_time = v.witnesses.front().time;
  return v;
}

DetectionVerdict merge_verdicts(const std::vector<DetectionVerdict>& verdicts) {
  DetectionVerdict out;
  for (const auto& v : verdicts)
    out.witnesses.insert(out.witnesses.end(), v.witnesses.begin(), v.witnesses.end());
  std::stable_sort(out.witnesses.begin(), out.witnesses.end(),
                   [](const Witness& a, const Witness& b) { return a.time < b.time; });
  out.detected = !out.witnesses.empty();
  if (out.detected) out.first_detection_time = out.witnesses.front().time;
  return out;
}

std::vector<StealthWindow> stealth_windows(double d, std::vector<double> p, double horizon) {
  std::vector<StealthWindow> out;
  const double last_start = horizon - d;
  if (!(d > 0.0) || last_start < 0.0) return out;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());

  // A sample at p rules out the starts (p - d, p].
  const auto push = [&](double lo, bool lo_open, double hi) {
    hi = std::min(hi, last_start);
    if (lo_open ? hi > lo : hi >= lo) out.push_back({lo, hi, lo_open});
  };
  if (p.empty() || p.front() > last_start + d) {
    push(0.0, false, last_start);
    return out;
  }
  if (p.front() - d >= 0.0) push(0.0, false, p.front() - d);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i] >= last_start) break;
    if (p[i + 1] - p[i] > d) push(p[i], true, p[i + 1] - d);
  }
  if (p.back() < last_start) push(p.back(), true, last_start);
  return out;
}

std::vector<StealthWindow> stealth_windows(double d, const std::vector<MonitorPoint>& mps,
                                           double horizon) {
  std::vector<double> all;
  for (const auto& mp : mps) {
    const auto s = sample_instants(mp, horizon);
    all.insert(all.end(), s.begin(), s.end());
  }
  return stealth_windows(d, std::move(all), horizon);
}

std::vector<MonitorPoint> observing_monitor_points(const Network& net, std::size_t device) {
  const auto br = net.device_branch(device);
  std::optional<std::size_t> feeder;
  for (std::size_t f = 0; f < net.feeders().size(); ++f) {
    const auto& b = net.feeders()[f].branches;
    if (std::find(b.begin(), b.end(), br) != b.end()) feeder = f;
  }
  std::vector<MonitorPoint> out;
  if (!feeder) return out;
  for (std::size_t m = 0; m < net.monitor_points().size(); ++m)
    if (net.feeder_of(net.monitor_bus(m)) == feeder) out.push_back(net.monitor_points()[m]);
  return out;
}

}  // namespace tdsec
