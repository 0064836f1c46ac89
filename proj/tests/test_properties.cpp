#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "tdsec/risk.hpp"
#include "tdsec/stealth.hpp"
#include "tdsec/violations.hpp"

using namespace tdsec;

using namespace tdsec::gen;

namespace {

constexpr int kCases = 25;

std::size_t voltage_count(const ViolationCounts& c) {
  return c.by_type[static_cast<std::size_t>(ViolationType::overvoltage)] +
         c.by_type[static_cast<std::size_t>(ViolationType::undervoltage)];
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("attacks are local in time") {
    Rng g(20240611);
    for (const char* file : test::small_fixtures) {
      const auto fx = test::load_fixture(file);
      for (int c = 0; c < 8; ++c) {
        const auto scn = random_scenario(g, fx.net);
        auto ops = random_commands(g, fx.net, 4);
        // Operator commands that a delayed command could overtake are left out.
        const double tail = scn.t_end + spill(scn);
        std::erase_if(ops, [&](const CommandEvent& e) {
          return std::find(scn.targets.begin(), scn.targets.end(), e.target) != scn.targets.end() &&
                 e.issue_time >= scn.t_end && e.issue_time <= tail;
        });
        CAPTURE(file);
        CAPTURE(c);
        const auto r = run_scenario(fx.net, fx.profiles, scn, ops, {kDay, 900}, SolverConfig{});
        for (std::size_t k = 0; k < r.baseline.steps.size(); ++k) {
          const double t0 = 900.0 * static_cast<double>(k), t1 = t0 + 900.0;
          if (t1 <= scn.t_start || t0 >= tail) {
            CAPTURE(k);
            CHECK(r.baseline.steps[k].device_states == r.attacked.steps[k].device_states);
            CHECK(r.baseline.steps[k].controls == r.attacked.steps[k].controls);
          }
        }
      }
    }
  }

  TEST_CASE("no-op scenarios give zero delta") {
    Rng g(77);
    for (const char* file : test::small_fixtures) {
      const auto fx = test::load_fixture(file);
      const auto limits = LimitSet::from_network(fx.net);
      for (int c = 0; c < 6; ++c) {
        CAPTURE(file);
        CAPTURE(c);
        AttackScenario s;
        s.id = "noop";
        s.t_start = 900.0 * pick(g, 0, 80);
        s.t_end = s.t_start + 900.0 * pick(g, 1, 15);
        const auto ids = scada_devices(fx.net);
        switch (c % 3) {
          case 0:
            s.kind = AttackClass::data_tamper;
            s.targets = {fx.net.inverters()[0].id};
            s.control = fx.net.inverters()[0].control;
            break;
          case 1:
            s.kind = AttackClass::command_block;
            s.targets = {ids[static_cast<std::size_t>(pick(g, 0, static_cast<int>(ids.size()) - 1))]};
            break;
          default:
            s.kind = AttackClass::time_delay;
            s.targets = {ids[static_cast<std::size_t>(pick(g, 0, static_cast<int>(ids.size()) - 1))]};
            s.delay = 0.0;
        }
        const auto r = run_scenario(fx.net, fx.profiles, s, {}, {kDay, 900}, SolverConfig{});
        const auto d = compare_timelines(fx.net, r.baseline, r.attacked, limits);
        CHECK(d.total == 0);
        CHECK(std::all_of(d.per_step.begin(), d.per_step.end(), [](long long v) { return v == 0; }));
        CHECK(std::all_of(d.by_type.begin(), d.by_type.end(), [](long long v) { return v == 0; }));
      }
    }
  }

  TEST_CASE("stealth windows shrink as the event grows") {
    Rng g(4242);
    const long horizon = 14400;
    for (int c = 0; c < kCases; ++c) {
      const auto mps = random_mps(g, pick(g, 1, 3));
      const long d1 = pick(g, 1, 1800), d2 = d1 + pick(g, 0, 1800);
      CAPTURE(c);
      const auto a = starts(stealth_windows(static_cast<double>(d1), mps, horizon), d1, horizon);
      const auto b = starts(stealth_windows(static_cast<double>(d2), mps, horizon), d2, horizon);
      CHECK(subset(b, a));
    }
  }

  TEST_CASE("adding a monitor point never enlarges the windows") {
    Rng g(99);
    const long horizon = 14400;
    for (int c = 0; c < kCases; ++c) {
      auto mps = random_mps(g, pick(g, 1, 3));
      const long d = pick(g, 1, 1500);
      const auto before = starts(stealth_windows(static_cast<double>(d), mps, horizon), d, horizon);
      const auto extra = random_mps(g, 1);
      mps.push_back(extra[0]);
      mps.back().id = "extra";
      const auto after = starts(stealth_windows(static_cast<double>(d), mps, horizon), d, horizon);
      CAPTURE(c);
      CHECK(subset(after, before));
    }
  }

  TEST_CASE("sparser sampling on a multiple of the interval never shrinks the windows") {
    Rng g(31337);
    const long horizon = 14400;
    for (int c = 0; c < kCases; ++c) {
      auto m = random_mps(g, 1);
      const long d = pick(g, 1, 1500);
      const auto dense = starts(stealth_windows(static_cast<double>(d), m, horizon), d, horizon);
      m[0].sampling_interval *= pick(g, 2, 4);
      const auto sparse = starts(stealth_windows(static_cast<double>(d), m, horizon), d, horizon);
      CAPTURE(c);
      CHECK(subset(dense, sparse));
    }
  }

  TEST_CASE("stealth windows match the brute-force scan on random grids") {
    Rng g(5150);
    const long horizon = 14400;
    for (int c = 0; c < kCases; ++c) {
      const auto mps = random_mps(g, pick(g, 1, 3));
      const long d = pick(g, 1, 2400);
      std::vector<double> all;
      for (const auto& m : mps)
        for (double t : sample_instants(m, static_cast<double>(horizon))) all.push_back(t);
      CAPTURE(c);
      CHECK(starts(stealth_windows(static_cast<double>(d), mps, horizon), d, horizon) ==
            oracle::brute_force_stealth_starts(all, d, horizon));
    }
  }

  TEST_CASE("shrinking the voltage band never lowers voltage counts") {
    Rng g(8);
    for (const char* file : {"demo/network.yaml", "fixtures/minimal.yaml", "fixtures/radial5.yaml",
                             "fixtures/mesh6.yaml"}) {
      const auto fx = test::load_fixture(file);
      const auto tl = time_series_run(fx.net, fx.profiles, {kDay, 900}, {}, SolverConfig{});
      for (int c = 0; c < 10; ++c) {
        const double wide = uniform(g, 0.002, 0.2);
        const double narrow = wide * uniform(g, 0.05, 1.0);
        const auto cw = count_timeline(fx.net, tl, LimitSet::from_network(fx.net, wide));
        const auto cn = count_timeline(fx.net, tl, LimitSet::from_network(fx.net, narrow));
        CAPTURE(file);
        CAPTURE(wide);
        CAPTURE(narrow);
        CHECK(voltage_count(cn) >= voltage_count(cw));
      }
    }
  }

  TEST_CASE("random networks survive a serialize/parse round trip") {
    Rng g(1234567);
    int built = 0;
    for (int c = 0; c < 60; ++c) {
      const auto data = random_network(g);
      CAPTURE(c);
      const Network net(data);
      ++built;
      const auto text = serialize_network(net.data());
      const auto back = parse_network(text);
      CHECK(back == net);
      CHECK(serialize_network(back.data()) == text);
    }
    CHECK(built == 60);
  }

  TEST_CASE("upstream devices dominate downstream ones on every fixture") {
    for (const char* file : {"demo/network.yaml", "fixtures/minimal.yaml", "fixtures/radial5.yaml",
                             "fixtures/mesh6.yaml"}) {
      const auto fx = test::load_fixture(file);
      const auto ids = scada_devices(fx.net);
      const auto res = criticality_sweep(fx.net, fx.profiles, {}, ids, {kDay, 900}, SolverConfig{},
                                         LimitSet::from_network(fx.net));
      REQUIRE(res.failed.empty());
      std::map<std::string, long long> count;
      for (const auto& e : res.ranked) count[e.device_id] = e.violation_count;
      for (const auto& down : ids) {
        const auto dd = *fx.net.find_device(down);
        const auto path = fx.net.upstream_path(fx.net.to_bus(fx.net.device_branch(dd)));
        for (const auto& up : ids) {
          if (up == down) continue;
          const auto ub = fx.net.device_branch(*fx.net.find_device(up));
          if (std::find(path.begin(), path.end(), ub) == path.end()) continue;
          CAPTURE(file);
          CAPTURE(up);
          CAPTURE(down);
          CHECK(count.at(up) >= count.at(down));
        }
      }
    }
  }

  TEST_CASE("raising an impact score never lowers severity") {
    Rng g(2718);
    auto cat = bundled_threat_catalog();
    for (int c = 0; c < kCases; ++c) {
      ThreatScenario s;
      s.id = "x";
      for (const auto& a : cat.areas) s.impact_scores[a.name] = static_cast<QualitativeScore>(pick(g, 1, 3));
      const int before = severity(s, cat.areas);
      auto& bump = s.impact_scores[cat.areas[static_cast<std::size_t>(pick(g, 0, static_cast<int>(cat.areas.size()) - 1))].name];
      if (bump != QualitativeScore::high) bump = static_cast<QualitativeScore>(value(bump) + 1);
      CHECK(severity(s, cat.areas) >= before);
      const auto p = static_cast<QualitativeScore>(pick(g, 1, 2));
      CHECK(risk_score(static_cast<QualitativeScore>(value(p) + 1), before) >= risk_score(p, before));
    }
  }

  TEST_CASE("ranking does not depend on the order areas are listed in") {
    Rng g(161803);
    const auto cat = bundled_threat_catalog();
    const auto ref = rank_catalog(cat);
    for (int c = 0; c < kCases; ++c) {
      auto perm = cat;
      std::shuffle(perm.areas.begin(), perm.areas.end(), g);
      const auto r = rank_catalog(perm);
      REQUIRE(r.size() == ref.size());
      for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r[i].scenario.id == ref[i].scenario.id);
        CHECK(r[i].severity == ref[i].severity);
        CHECK(r[i].risk == ref[i].risk);
      }
    }
  }
}
