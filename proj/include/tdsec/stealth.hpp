#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tdsec/grid_model.hpp"
#include "tdsec/power_flow.hpp"

namespace tdsec {

/// offset + k * interval for every k with the instant in [0, horizon].
std::vector<double> sample_instants(const MonitorPoint& mp, double horizon);

/// What a monitor point reports. Vectors of unobserved quantities are empty.
struct ObservedSeries {
  std::string mp_id;
  std::vector<double> sample_times;
  std::vector<double> voltage_pu;
  std::vector<double> current_a;
  /// States of the devices on the point's upstream path plus whether its
  /// bus is energized, e.g. "B2=closed,R2=closed|energized".
  std::vector<std::string> device_state;
  /// Ampacity of the branch whose current is reported; 0 when none.
  double ampacity = 0.0;
};

/// Reads each sample from the step containing the instant.
ObservedSeries sample(const Network& net, const MonitorPoint& mp, const Timeline& tl);

struct DetectionThresholds {
  double voltage_pu = 0.005;
  double current_fraction = 0.01;  ///< of the reported branch's ampacity
};

struct Witness {
  double time = 0.0;
  Quantity quantity = Quantity::device_state;
  std::string baseline;
  std::string attacked;
};

struct DetectionVerdict {
  bool detected = false;
  std::optional<double> first_detection_time;
  std::vector<Witness> witnesses;
};

/// Compares an attacked series against its baseline sample by sample.
/// Throws InputError(invariant) when the sample grids differ.
DetectionVerdict detect_event(const ObservedSeries& baseline, const ObservedSeries& attacked,
                              const DetectionThresholds& thresholds = {});

/// Merges the verdicts of several monitor points.
DetectionVerdict merge_verdicts(const std::vector<DetectionVerdict>& verdicts);

/// Interval of start times; closed at `hi`, and at `lo` unless lo_open.
struct StealthWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = true;

  bool contains(double t) const { return (lo_open ? t > lo : t >= lo) && t <= hi; }
  bool operator==(const StealthWindow&) const = default;
};

/// Maximal sets of start times s in [0, horizon - d] such that [s, s + d)
/// holds no sample instant of any given point.
std::vector<StealthWindow> stealth_windows(double d, const std::vector<MonitorPoint>& mps,
                                           double horizon);
/// Same, from an explicit set of sample instants.
std::vector<StealthWindow> stealth_windows(double d, std::vector<double> instants, double horizon);

/// Monitor points on the feeder that contains the device's branch.
std::vector<MonitorPoint> observing_monitor_points(const Network& net, std::size_t device);

}  // namespace tdsec
