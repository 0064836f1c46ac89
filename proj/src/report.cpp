#include "tdsec/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace tdsec {

using Json = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Json type_counts(const TypeCounts& c) {
  Json j = Json::object();
  for (auto t : all_violation_types) j[std::string(to_string(t))] = c[static_cast<std::size_t>(t)];
  return j;
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// Minimal SVG canvas with fixed-precision coordinates.
class Svg {
public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void rect(double x, double y, double w, double h, const char* fill) {
    body_ << "<rect x=\"" << f(x) << "\" y=\"" << f(y) << "\" width=\"" << f(w) << "\" height=\""
          << f(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0) {
    body_ << "<line x1=\"" << f(x1) << "\" y1=\"" << f(y1) << "\" x2=\"" << f(x2) << "\" y2=\""
          << f(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << f(width) << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const char* anchor = "start",
            int size = 11, double rotate = 0.0) {
    body_ << "<text x=\"" << f(x) << "\" y=\"" << f(y) << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0) body_ << " transform=\"rotate(" << f(rotate) << ' ' << f(x) << ' ' << f(y) << ")\"";
    body_ << '>' << xml_escape(s) << "</text>\n";
  }
  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(w_) << "\" height=\"" << f(h_)
        << "\" viewBox=\"0 0 " << f(w_) << ' ' << f(h_) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << body_.str() << "</svg>\n";
    return out.str();
  }

private:
  static std::string f(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, std::round(v * 100.0) / 100.0,
                                   std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
  }
  double w_, h_;
  std::ostringstream body_;
};

/// Round maximum up to a 1-2-5 tick value.
double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= v) return m * mag;
  return 10.0 * mag;
}

void y_axis(Svg& svg, double x0, double y0, double h, double ymax, const std::string& label) {
  svg.line(x0, y0, x0, y0 - h, "black");
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 - h * i / 4.0;
    svg.line(x0 - 4, y, x0, y, "black");
    svg.text(x0 - 6, y + 4, format_number(ymax * i / 4.0), "end", 10);
  }
  svg.text(x0 - 40, y0 - h / 2, label, "middle", 11, -90.0);
}

}  // namespace

std::string violation_csv(const ViolationDelta& delta, const std::string& scenario_id) {
  std::ostringstream out;
  out << "timestep,component,type,observed,limit,scenario_id\n";
  const auto emit = [&](const std::vector<ViolationRecord>& recs, const std::string& tag) {
    for (const auto& r : recs)
      out << r.timestep << ',' << csv_field(r.component) << ',' << to_string(r.type) << ','
          << format_number(r.observed) << ',' << format_number(r.limit) << ',' << csv_field(tag)
          << '\n';
  };
  emit(delta.baseline.records, "baseline");
  emit(delta.attacked.records, scenario_id);
  return out.str();
}

std::string violation_summary_json(const ViolationDelta& delta, const std::string& scenario_id,
                                   const Timeline& attacked) {
  Json j;
  j["scenario_id"] = scenario_id;
  j["horizon_s"] = attacked.horizon;
  j["step_s"] = attacked.step;
  j["steps"] = attacked.steps.size();
  j["totals"] = {{"baseline", delta.baseline.total},
                 {"attacked", delta.attacked.total},
                 {"delta", delta.total}};
  Json by_type = Json::object();
  for (auto t : all_violation_types) {
    const auto i = static_cast<std::size_t>(t);
    by_type[std::string(to_string(t))] = {{"baseline", delta.baseline.by_type[i]},
                                          {"attacked", delta.attacked.by_type[i]},
                                          {"delta", delta.by_type[i]}};
  }
  j["by_type"] = by_type;
  Json series = Json::array();
  for (std::size_t k = 0; k < delta.per_step.size(); ++k) {
    series.push_back({{"timestep", k},
                      {"time_s", attacked.steps[k].time_s},
                      {"baseline", delta.baseline.per_step[k]},
                      {"attacked", delta.attacked.per_step[k]},
                      {"delta", delta.per_step[k]},
                      {"attacked_by_type", type_counts(delta.attacked.per_step_by_type[k])}});
  }
  j["per_step"] = series;
  Json failed = Json::array();
  for (const auto& s : attacked.steps)
    if (!s.converged) failed.push_back({{"timestep", s.timestep}, {"reason", s.failure}});
  j["failed_steps"] = failed;
  return j.dump(2) + "\n";
}

std::string step_chart_svg(const ViolationDelta& delta, double step, const std::string& title) {
  const std::size_t n = delta.per_step.size();
  const double left = 60, right = 20, top = 40, bottom = 50, plot_h = 260;
  const double bar_group = n > 0 ? std::max(4.0, 900.0 / static_cast<double>(n)) : 10.0;
  const double plot_w = bar_group * static_cast<double>(n);
  Svg svg(left + plot_w + right, top + plot_h + bottom);
  std::size_t peak = 1;
  for (std::size_t k = 0; k < n; ++k)
    peak = std::max({peak, delta.baseline.per_step[k], delta.attacked.per_step[k]});
  const double ymax = nice_ceiling(static_cast<double>(peak));
  const double y0 = top + plot_h;
  svg.text(left + plot_w / 2, 20, title, "middle", 14);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = left + bar_group * static_cast<double>(k);
    const double hb = plot_h * static_cast<double>(delta.baseline.per_step[k]) / ymax;
    const double ha = plot_h * static_cast<double>(delta.attacked.per_step[k]) / ymax;
    svg.rect(x + bar_group * 0.1, y0 - hb, bar_group * 0.4, hb, "#4c78a8");
    svg.rect(x + bar_group * 0.5, y0 - ha, bar_group * 0.4, ha, "#e45756");
  }
  svg.line(left, y0, left + plot_w, y0, "black");
  const std::size_t label_every = std::max<std::size_t>(1, n / 12);
  for (std::size_t k = 0; k < n; k += label_every) {
    const double x = left + bar_group * (static_cast<double>(k) + 0.5);
    const double hours = static_cast<double>(k) * step / 3600.0;
    svg.text(x, y0 + 16, format_number(std::round(hours * 100) / 100) + "h", "middle", 10);
  }
  y_axis(svg, left, y0, plot_h, ymax, "violations per step");
  svg.rect(left + 10, top - 14, 10, 10, "#4c78a8");
  svg.text(left + 24, top - 5, "baseline", "start", 10);
  svg.rect(left + 90, top - 14, 10, 10, "#e45756");
  svg.text(left + 104, top - 5, "attacked", "start", 10);
  svg.text(left + plot_w / 2, y0 + 38, "time of day", "middle", 11);
  return svg.str();
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "rank,device,violation_delta,baseline_total,attacked_total,electrical_distance_pu,status\n";
  std::size_t rank = 1;
  for (const auto& e : sweep.ranked)
    out << rank++ << ',' << csv_field(e.device_id) << ',' << e.violation_count << ','
        << e.baseline_total << ',' << e.attacked_total << ','
        << format_number(e.electrical_distance) << ",ok\n";
  for (const auto& e : sweep.failed)
    out << ',' << csv_field(e.device_id) << ",,,," << format_number(e.electrical_distance) << ','
        << csv_field("failed: " + *e.failure) << '\n';
  return out.str();
}

std::string sweep_json(const SweepResult& sweep) {
  Json j;
  Json ranked = Json::array();
  for (const auto& e : sweep.ranked)
    ranked.push_back({{"device", e.device_id},
                      {"violation_delta", e.violation_count},
                      {"baseline_total", e.baseline_total},
                      {"attacked_total", e.attacked_total},
                      {"attacked_by_type", type_counts(e.attacked_by_type)},
                      {"electrical_distance_pu", json_number(e.electrical_distance)}});
  j["ranked"] = ranked;
  Json failed = Json::array();
  for (const auto& e : sweep.failed)
    failed.push_back({{"device", e.device_id}, {"failure", *e.failure}});
  j["failed"] = failed;
  return j.dump(2) + "\n";
}

std::string sweep_chart_svg(const SweepResult& sweep) {
  const std::size_t n = sweep.ranked.size();
  const double left = 70, right = 20, top = 40, bottom = 80, plot_h = 260, bar = 60;
  const double plot_w = std::max(1.0, bar * static_cast<double>(n));
  Svg svg(left + plot_w + right, top + plot_h + bottom);
  long long peak = 1;
  for (const auto& e : sweep.ranked) peak = std::max(peak, e.violation_count);
  const double ymax = nice_ceiling(static_cast<double>(peak));
  const double y0 = top + plot_h;
  svg.text(left + plot_w / 2, 20, "Violations added by forcing each device open", "middle", 14);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = sweep.ranked[i];
    const double x = left + bar * static_cast<double>(i);
    const double h = plot_h * static_cast<double>(std::max(0LL, e.violation_count)) / ymax;
    svg.rect(x + bar * 0.15, y0 - h, bar * 0.7, h, "#f58518");
    svg.text(x + bar / 2, y0 - h - 4, std::to_string(e.violation_count), "middle", 10);
    svg.text(x + bar / 2, y0 + 16, e.device_id, "middle", 10);
  }
  svg.line(left, y0, left + plot_w, y0, "black");
  y_axis(svg, left, y0, plot_h, ymax, "delta violations");
  svg.text(left + plot_w / 2, y0 + 40, "device (ranked)", "middle", 11);
  return svg.str();
}

std::string stealth_json(const StealthReport& r) {
  Json j;
  j["scenario_id"] = r.scenario_id;
  j["target"] = r.target;
  j["event"] = {{"start_s", r.event_start}, {"duration_s", r.event_duration}};
  j["horizon_s"] = r.horizon;
  Json mps = Json::array();
  for (const auto& mp : r.window_mps)
    mps.push_back({{"id", mp.id},
                   {"bus", mp.bus_id},
                   {"sampling_interval_s", mp.sampling_interval},
                   {"phase_offset_s", mp.phase_offset}});
  j["monitor_points"] = mps;
  j["joint_sample_count"] = r.joint_samples.size();
  j["joint_samples_s"] = r.joint_samples;
  Json wins = Json::array();
  for (const auto& w : r.windows)
    wins.push_back({{"start_min_s", w.lo}, {"start_min_open", w.lo_open}, {"start_max_s", w.hi}});
  j["stealth_windows"] = wins;
  const auto verdict = [](const DetectionVerdict& v) {
    Json out;
    out["detected"] = v.detected;
    out["first_detection_s"] = v.first_detection_time ? Json(*v.first_detection_time) : Json(nullptr);
    Json w = Json::array();
    for (const auto& x : v.witnesses)
      w.push_back({{"time_s", x.time},
                   {"quantity", std::string(to_string(x.quantity))},
                   {"baseline", x.baseline},
                   {"attacked", x.attacked}});
    out["witnesses"] = w;
    return out;
  };
  Json per = Json::object();
  for (const auto& [id, v] : r.per_mp) per[id] = verdict(v);
  j["per_monitor_point"] = per;
  j["verdict"] = verdict(r.verdict);
  return j.dump(2) + "\n";
}

std::string stealth_strip_svg(const StealthReport& r) {
  const double left = 40, right = 40, width = 1000, top = 40;
  const double row = 34;
  const double h = top + row * static_cast<double>(r.window_mps.size() + 2) + 40;
  Svg svg(left + width + right, h);
  const double scale = r.horizon > 0 ? width / r.horizon : 0.0;
  svg.text(left + width / 2, 20, "Monitor point samples and stealth windows", "middle", 14);
  double y = top;
  for (const auto& mp : r.window_mps) {
    svg.text(left, y + 10, mp.id, "start", 10);
    svg.line(left, y + 20, left + width, y + 20, "#999999");
    for (double s : sample_instants(mp, r.horizon))
      svg.line(left + s * scale, y + 14, left + s * scale, y + 26, "#4c78a8", 1.5);
    y += row;
  }
  svg.text(left, y + 10, "feasible starts", "start", 10);
  for (const auto& w : r.windows)
    svg.rect(left + w.lo * scale, y + 14, std::max(1.0, (w.hi - w.lo) * scale), 12, "#54a24b");
  y += row;
  svg.text(left, y + 10, "event", "start", 10);
  svg.rect(left + r.event_start * scale, y + 14, std::max(1.0, r.event_duration * scale), 12,
           r.verdict.detected ? "#e45756" : "#72b7b2");
  svg.text(left + width, y + 10, r.verdict.detected ? "detected" : "not detected", "end", 10);
  y += row;
  for (int hr = 0; r.horizon > 0 && hr * 3600.0 <= r.horizon; hr += 3)
    svg.text(left + hr * 3600.0 * scale, y + 10, std::to_string(hr) + "h", "middle", 10);
  return svg.str();
}

std::string risk_table_text(const std::vector<RankedThreat>& ranked) {
  std::ostringstream out;
  std::size_t w = 14;
  for (const auto& r : ranked) w = std::max(w, r.scenario.affected_asset.size());
  const auto pad = [](const std::string& s, std::size_t n) {
    return s + std::string(n > s.size() ? n - s.size() : 0, ' ');
  };
  out << "rank  " << pad("affected asset", w) << "  probability  severity  risk\n";
  std::size_t k = 1;
  for (const auto& r : ranked) {
    out << pad(std::to_string(k++), 6) << pad(r.scenario.affected_asset, w) << "  "
        << pad(std::string(to_string(r.scenario.risk_probability)) + " (" +
                   std::to_string(r.probability) + ")",
               13)
        << pad(std::to_string(r.severity) + (r.severity_from_override ? "*" : ""), 10) << r.risk
        << '\n';
  }
  if (std::any_of(ranked.begin(), ranked.end(),
                  [](const RankedThreat& r) { return r.severity_from_override; }))
    out << "* severity given directly in the catalog\n";
  return out.str();
}

std::string risk_json(const std::vector<RankedThreat>& ranked) {
  Json arr = Json::array();
  std::size_t k = 1;
  for (const auto& r : ranked) {
    Json scores = Json::object();
    for (const auto& [area, s] : r.scenario.impact_scores) scores[area] = value(s);
    arr.push_back({{"rank", k++},
                   {"id", r.scenario.id},
                   {"affected_asset", r.scenario.affected_asset},
                   {"actor", r.scenario.actor},
                   {"motive", r.scenario.motive},
                   {"access", r.scenario.access},
                   {"outcome", r.scenario.outcome},
                   {"risk_probability", std::string(to_string(r.scenario.risk_probability))},
                   {"probability_value", r.probability},
                   {"impact_scores", scores},
                   {"severity", r.severity},
                   {"severity_from_override", r.severity_from_override},
                   {"risk_score", r.risk},
                   {"note", r.scenario.note}});
  }
  Json j;
  j["ranked"] = arr;
  return j.dump(2) + "\n";
}

}  // namespace tdsec
