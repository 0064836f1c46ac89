#include <doctest.h>

#include "support.hpp"
#include "tdsec/errors.hpp"
#include "tdsec/risk.hpp"

using namespace tdsec;

namespace {

std::vector<ImpactArea> five_areas() {
  return {{"reputation", 5}, {"financial", 4}, {"productivity", 3}, {"safety", 2}, {"fines", 1}};
}

ThreatScenario scored(std::string id, QualitativeScore p, std::vector<int> scores) {
  ThreatScenario s;
  s.id = std::move(id);
  s.risk_probability = p;
  const auto areas = five_areas();
  for (std::size_t i = 0; i < areas.size(); ++i)
    s.impact_scores[areas[i].name] = static_cast<QualitativeScore>(scores[i]);
  return s;
}

}  // namespace

TEST_SUITE("risk") {
  TEST_CASE("worked severity example") {
    const auto s = scored("inv", QualitativeScore::medium, {1, 3, 1, 3, 1});
    CHECK(severity(s, five_areas()) == 27);
    CHECK(risk_score(QualitativeScore::medium, 27) == 54);
  }

  TEST_CASE("qualitative mapping") {
    CHECK(value(QualitativeScore::low) == 1);
    CHECK(value(QualitativeScore::medium) == 2);
    CHECK(value(QualitativeScore::high) == 3);
    CHECK(qualitative_score_from("High") == QualitativeScore::high);
    CHECK(qualitative_score_from("2") == QualitativeScore::medium);
    CHECK_FALSE(qualitative_score_from("extreme"));
  }

  TEST_CASE("all low, all high") {
    CHECK(severity(scored("a", QualitativeScore::low, {1, 1, 1, 1, 1}), five_areas()) == 15);
    CHECK(severity(scored("b", QualitativeScore::low, {3, 3, 3, 3, 3}), five_areas()) == 45);
  }

  TEST_CASE("bundled catalog ranks 54, 31, 30") {
    const auto ranked = rank_catalog(bundled_threat_catalog());
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].scenario.id == "solar_inverters");
    CHECK(ranked[0].severity == 27);
    CHECK(ranked[0].risk == 54);
    CHECK_FALSE(ranked[0].severity_from_override);
    CHECK(ranked[1].scenario.id == "scada_devices");
    CHECK(ranked[1].severity == 31);
    CHECK(ranked[1].risk == 31);
    CHECK(ranked[2].scenario.id == "monitor_points");
    CHECK(ranked[2].severity == 15);
    CHECK(ranked[2].risk == 30);
  }

  TEST_CASE("catalog file matches the bundled catalog") {
    const auto file = rank_catalog(load_catalog(test::data_path("catalog/table1.yaml")));
    const auto built = rank_catalog(bundled_threat_catalog());
    REQUIRE(file.size() == built.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
      CHECK(file[i].scenario.id == built[i].scenario.id);
      CHECK(file[i].risk == built[i].risk);
      CHECK(file[i].severity == built[i].severity);
    }
  }

  TEST_CASE("single scenario ranks as itself") {
    ThreatCatalog c;
    c.areas = five_areas();
    c.scenarios = {scored("only", QualitativeScore::high, {2, 2, 2, 2, 2})};
    const auto r = rank_catalog(c);
    REQUIRE(r.size() == 1);
    CHECK(r[0].scenario.id == "only");
    CHECK(r[0].risk == 90);
  }

  TEST_CASE("equal risk: higher severity first, then input order") {
    ThreatCatalog c;
    c.areas = five_areas();
    // 2 x 30 = 60 and 3 x 20 = 60
    c.scenarios = {scored("low_sev", QualitativeScore::high, {1, 1, 2, 2, 1}),
                   scored("high_sev", QualitativeScore::medium, {2, 2, 2, 2, 2})};
    REQUIRE(severity(c.scenarios[0], c.areas) == 20);
    REQUIRE(severity(c.scenarios[1], c.areas) == 30);
    auto r = rank_catalog(c);
    CHECK(r[0].scenario.id == "high_sev");
    CHECK(r[1].scenario.id == "low_sev");

    c.scenarios = {scored("first", QualitativeScore::low, {1, 1, 1, 1, 1}),
                   scored("second", QualitativeScore::low, {1, 1, 1, 1, 1})};
    r = rank_catalog(c);
    CHECK(r[0].scenario.id == "first");
    CHECK(r[1].input_index == 1);
  }

  TEST_CASE("catalog validation") {
    ThreatCatalog c;
    c.areas = five_areas();
    c.scenarios = {scored("a", QualitativeScore::low, {1, 1, 1, 1, 1})};
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.areas[0].priority = 4;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = c;
    bad.scenarios[0].impact_scores.erase("fines");
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = c;
    bad.scenarios.push_back(bad.scenarios[0]);
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = c;
    bad.scenarios[0].impact_scores["weather"] = QualitativeScore::low;
    CHECK_THROWS_AS(bad.validate(), InputError);
  }

  TEST_CASE("catalog parse errors") {
    CHECK_THROWS_AS(parse_catalog("format_version: \"1.0\"\nareas: [\n"), InputError);
    CHECK_THROWS_AS(parse_catalog("format_version: \"9\"\nareas: []\nscenarios: []\n"), InputError);
  }
}
