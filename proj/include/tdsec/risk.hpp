#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdsec {

enum class QualitativeScore { low = 1, medium = 2, high = 3 };

std::string_view to_string(QualitativeScore s);
std::optional<QualitativeScore> qualitative_score_from(std::string_view s);
inline int value(QualitativeScore s) { return static_cast<int>(s); }

struct ImpactArea {
  std::string name;
  int priority = 1;
};

struct ThreatScenario {
  std::string id;
  std::string affected_asset;
  std::string actor;
  std::string motive;
  std::string access;
  std::string outcome;
  QualitativeScore risk_probability = QualitativeScore::low;
  /// Area name -> score. Empty when severity_override is set.
  std::map<std::string, QualitativeScore> impact_scores;
  /// Severity taken as given when per-area scores are not available.
  std::optional<int> severity_override;
  std::string note;
};

struct ThreatCatalog {
  std::vector<ImpactArea> areas;
  std::vector<ThreatScenario> scenarios;

  /// Throws InputError(invariant) when priorities are not a permutation of
  /// 1..n, a scenario misses or repeats an area, or ids repeat.
  void validate() const;
};

/// Sum of priority x score over the areas, or the override when present.
/// Throws InputError(invariant) on a missing area score.
int severity(const ThreatScenario& scn, const std::vector<ImpactArea>& areas);
int risk_score(QualitativeScore probability, int severity);

struct RankedThreat {
  std::size_t input_index = 0;
  ThreatScenario scenario;
  int probability = 0;
  int severity = 0;
  int risk = 0;
  bool severity_from_override = false;
};

/// Highest risk first; ties by higher severity, then input order.
std::vector<RankedThreat> rank_catalog(const ThreatCatalog& cat);

ThreatCatalog parse_catalog(std::string_view text);
ThreatCatalog load_catalog(const std::string& path);

/// Impact areas and the three critical-asset scenarios of the reference
/// study (inverters, SCADA devices, monitor points).
ThreatCatalog bundled_threat_catalog();

}  // namespace tdsec
