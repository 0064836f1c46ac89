#pragma once

#include <string>
#include <vector>

#include "tdsec/risk.hpp"
#include "tdsec/stealth.hpp"
#include "tdsec/violations.hpp"

namespace tdsec {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// `timestep,component,type,observed,limit,scenario_id`; baseline rows are
/// tagged "baseline".
std::string violation_csv(const ViolationDelta& delta, const std::string& scenario_id);

std::string violation_summary_json(const ViolationDelta& delta, const std::string& scenario_id,
                                   const Timeline& attacked);

/// Grouped per-step bar chart of baseline and attacked counts.
std::string step_chart_svg(const ViolationDelta& delta, double step, const std::string& title);

std::string sweep_csv(const SweepResult& sweep);
std::string sweep_json(const SweepResult& sweep);
std::string sweep_chart_svg(const SweepResult& sweep);

struct StealthReport {
  std::string scenario_id;
  std::string target;
  double event_start = 0.0;
  double event_duration = 0.0;
  double horizon = 0.0;
  std::vector<MonitorPoint> window_mps;  ///< points used for the windows
  std::vector<double> joint_samples;
  std::vector<StealthWindow> windows;
  std::vector<std::pair<std::string, DetectionVerdict>> per_mp;
  DetectionVerdict verdict;
};

std::string stealth_json(const StealthReport& r);
std::string stealth_strip_svg(const StealthReport& r);

std::string risk_table_text(const std::vector<RankedThreat>& ranked);
std::string risk_json(const std::vector<RankedThreat>& ranked);

}  // namespace tdsec
