#include "tdsec/risk.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tdsec/errors.hpp"
#include "yaml_util.hpp"

namespace tdsec {

std::string_view to_string(QualitativeScore s) {
  switch (s) {
    case QualitativeScore::low: return "low";
    case QualitativeScore::medium: return "medium";
    case QualitativeScore::high: return "high";
  }
  return "?";
}

std::optional<QualitativeScore> qualitative_score_from(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "low" || lower == "1") return QualitativeScore::low;
  if (lower == "medium" || lower == "2") return QualitativeScore::medium;
  if (lower == "high" || lower == "3") return QualitativeScore::high;
  return std::nullopt;
}

void ThreatCatalog::validate() const {
  const auto bad = [](std::string msg, std::string subject = {}) {
    throw InputError(InputError::Kind::invariant, std::move(msg), std::move(subject));
  };
  const int n = static_cast<int>(areas.size());
  if (n == 0) bad("catalog has no impact areas");
  std::set<int> prio;
  std::set<std::string> names;
  for (const auto& a : areas) {
    if (!names.insert(a.name).second) bad("impact area '" + a.name + "' listed twice", a.name);
    if (a.priority < 1 || a.priority > n)
      bad("priority of '" + a.name + "' must lie in 1.." + std::to_string(n), a.name);
    if (!prio.insert(a.priority).second)
      bad("priority " + std::to_string(a.priority) + " used twice", a.name);
  }
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second)
      throw InputError(InputError::Kind::duplicate_id, "duplicate scenario id '" + s.id + "'", s.id);
    if (s.severity_override) {
      if (*s.severity_override < 0) bad("severity override of '" + s.id + "' is negative", s.id);
      if (!s.impact_scores.empty())
        bad("scenario '" + s.id + "' has both impact scores and a severity override", s.id);
      continue;
    }
    for (const auto& [area, score] : s.impact_scores)
      if (!names.count(area))
        throw InputError(InputError::Kind::dangling_reference,
                         "scenario '" + s.id + "' scores unknown area '" + area + "'", area, s.id);
    for (const auto& a : areas)
      if (!s.impact_scores.count(a.name))
        bad("scenario '" + s.id + "' has no score for area '" + a.name + "'", a.name);
  }
}

int severity(const ThreatScenario& scn, const std::vector<ImpactArea>& areas) {
  if (scn.severity_override) return *scn.severity_override;
  int total = 0;
  for (const auto& a : areas) {
    const auto it = scn.impact_scores.find(a.name);
    if (it == scn.impact_scores.end())
      throw InputError(InputError::Kind::invariant,
                       "scenario '" + scn.id + "' has no score for area '" + a.name + "'", a.name);
    total += a.priority * value(it->second);
  }
  return total;
}

int risk_score(QualitativeScore probability, int sev) { return value(probability) * sev; }

std::vector<RankedThreat> rank_catalog(const ThreatCatalog& cat) {
  cat.validate();
  std::vector<RankedThreat> out;
  for (std::size_t i = 0; i < cat.scenarios.size(); ++i) {
    const auto& s = cat.scenarios[i];
    RankedThreat r;
    r.input_index = i;
    r.scenario = s;
    r.probability = value(s.risk_probability);
    r.severity = severity(s, cat.areas);
    r.risk = risk_score(s.risk_probability, r.severity);
    r.severity_from_override = s.severity_override.has_value();
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedThreat& a, const RankedThreat& b) {
    if (a.risk != b.risk) return a.risk > b.risk;
    return a.severity > b.severity;
  });
  return out;
}

ThreatCatalog parse_catalog(std::string_view text) {
  using namespace detail;
  const YAML::Node root = load_yaml(text);
  if (!root.IsMap()) throw InputError(InputError::Kind::syntax, "catalog must be a mapping");
  check_format_version(root, "catalog");
  ThreatCatalog cat;
  for (const auto& r : sequence(root, "areas")) {
    if (!r.IsMap()) fail_at(r, InputError::Kind::syntax, "areas entries must be mappings");
    ImpactArea a;
    a.name = required<std::string>(r, "name", "areas");
    a.priority = required<int>(r, "priority", a.name);
    cat.areas.push_back(std::move(a));
  }
  for (const auto& r : sequence(root, "scenarios")) {
    ThreatScenario s;
    s.id = record_id(r, "scenarios");
    s.affected_asset = optional_or<std::string>(r, "affected_asset", s.id, s.id);
    s.actor = optional_or<std::string>(r, "actor", "attacker", s.id);
    s.motive = optional_or<std::string>(r, "motive", "deliberate", s.id);
    s.access = optional_or<std::string>(r, "access", "technical means", s.id);
    s.outcome = optional_or<std::string>(r, "outcome", "", s.id);
    s.note = optional_or<std::string>(r, "note", "", s.id);
    s.risk_probability =
        enum_field(r, "risk_probability", s.id, qualitative_score_from, "low|medium|high");
    s.severity_override = optional_field<int>(r, "severity_override", s.id);
    if (const YAML::Node m = r["impact_scores"]; m && !m.IsNull()) {
      if (!m.IsMap()) fail_at(m, InputError::Kind::syntax, "impact_scores must be a mapping", "", s.id);
      for (const auto& kv : m) {
        const auto area = kv.first.as<std::string>();
        const auto text_score = kv.second.as<std::string>();
        const auto score = qualitative_score_from(text_score);
        if (!score)
          fail_at(kv.second, InputError::Kind::syntax,
                  "invalid score '" + text_score + "' for area '" + area + "' in '" + s.id + "'",
                  text_score, s.id);
        if (!s.impact_scores.emplace(area, *score).second)
          fail_at(kv.first, InputError::Kind::duplicate_id,
                  "area '" + area + "' scored twice in '" + s.id + "'", area, s.id);
      }
    }
    cat.scenarios.push_back(std::move(s));
  }
  cat.validate();
  return cat;
}

ThreatCatalog load_catalog(const std::string& path) {
  return parse_catalog(detail::read_text_file(path));
}

ThreatCatalog bundled_threat_catalog() {
  ThreatCatalog cat;
  cat.areas = {{"Safety and health", 5},
               {"Financial", 4},
               {"Productivity", 3},
               {"Reputation", 2},
               {"Fines and legal penalties", 1}};
  using enum QualitativeScore;

  ThreatScenario inv;
  inv.id = "solar_inverters";
  inv.affected_asset = "Solar Inverters";
  inv.outcome = "Transient Voltage & Frequency Instability";
  inv.risk_probability = medium;
  inv.impact_scores = {{"Safety and health", low},
                       {"Financial", high},
                       {"Productivity", low},
                       {"Reputation", high},
                       {"Fines and legal penalties", low}};

  ThreatScenario scada;
  scada.id = "scada_devices";
  scada.affected_asset = "SCADA Devices";
  scada.outcome = "Anomalous Grid Sectionalization & Electricity Loss";
  scada.risk_probability = low;
  scada.severity_override = 31;
  scada.note = "severity as published; per-area scores not given";

  ThreatScenario mp;
  mp.id = "monitor_points";
  mp.affected_asset = "Monitor Points";
  mp.outcome = "Loss of Situational Awareness & Erroneous Control";
  mp.risk_probability = medium;
  mp.severity_override = 15;
  mp.note = "severity as published; per-area scores not given";

  for (auto* s : {&inv, &scada, &mp}) {
    s->actor = "attacker";
    s->motive = "deliberate";
    s->access = "technical means";
    cat.scenarios.push_back(*s);
  }
  return cat;
}

}  // namespace tdsec
