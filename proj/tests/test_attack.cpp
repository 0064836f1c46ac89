#include <doctest.h>

#include <algorithm>
#include <variant>

#include "support.hpp"
#include "tdsec/attack.hpp"
#include "tdsec/errors.hpp"

using namespace tdsec;

namespace {

constexpr double kDay = 86400.0;

AttackScenario delay_b2(double t0, double t1, double delay, std::optional<Transient> tr = {}) {
  AttackScenario s;
  s.id = "d";
  s.kind = AttackClass::time_delay;
  s.targets = {"B2"};
  s.t_start = t0;
  s.t_end = t1;
  s.delay = delay;
  s.transient = tr;
  return s;
}

CommandStream attacker_part(const CommandStream& s) {
  CommandStream out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out),
               [](const CommandEvent& c) { return c.origin == Origin::attacker; });
  return out;
}

}  // namespace

TEST_SUITE("attack") {
  TEST_CASE("scenario file parses") {
    const auto f = test::demo_scenarios();
    CHECK(f.operator_commands.size() == 2);
    REQUIRE(f.find("tamper_all"));
    const auto& t = *f.find("tamper_all");
    CHECK(t.kind == AttackClass::data_tamper);
    CHECK(t.targets.size() == 4);
    CHECK(t.control.p_limit == 0.0);
    const auto& b = *f.find("block_b2");
    CHECK(b.kind == AttackClass::command_block);
    CHECK(b.forced == SwitchState::open);
    CHECK(b.block == BlockFilter::all);
    const auto& d = *f.find("stealth_b2");
    REQUIRE(d.transient);
    CHECK(d.transient->duration == 600);
    CHECK(f.find("nope") == nullptr);
  }

  TEST_CASE("tamper on all demo inverters zeroes their output all day") {
    const auto fx = test::demo();
    const auto f = test::demo_scenarios();
    const auto r = run_scenario(fx.net, fx.profiles, *f.find("tamper_all"), f.operator_commands,
                                {kDay, 900}, SolverConfig{});
    REQUIRE(r.attacked.steps.size() == 96);
    for (const auto& s : r.attacked.steps)
      for (const auto& o : s.inverter_output) {
        CHECK(o.p_w == 0.0);
        CHECK(o.q_var == 0.0);
      }
    bool any_pv = false;
    for (const auto& s : r.baseline.steps)
      for (const auto& o : s.inverter_output) any_pv = any_pv || o.p_w > 0;
    CHECK(any_pv);
  }

  TEST_CASE("tamper injects and restores") {
    const auto fx = test::demo();
    AttackScenario s;
    s.id = "t";
    s.kind = AttackClass::data_tamper;
    s.targets = {"pv_b6"};
    s.t_start = 3600;
    s.t_end = 7200;
    s.control.mode = InverterMode::limit_p;
    s.control.p_limit = 1000;
    const auto out = attacker_part(apply_attack(s, {}, fx.net, kDay));
    REQUIRE(out.size() == 2);
    CHECK(out[0].issue_time == 3600);
    CHECK(std::get<InverterControl>(out[0].action) == s.control);
    CHECK(out[1].issue_time == 7200);
    CHECK(std::get<InverterControl>(out[1].action) ==
          fx.net.inverters()[*fx.net.find_inverter("pv_b6")].control);
    CHECK(out[0].scenario_id == "t");
  }

  TEST_CASE("command block with nothing to block changes nothing") {
    const auto fx = test::demo();
    AttackScenario s;
    s.id = "b";
    s.kind = AttackClass::command_block;
    s.targets = {"B1"};
    s.t_start = 0;
    s.t_end = 3600;
    CHECK(apply_attack(s, {}, fx.net, kDay).empty());
    const auto ops = test::demo_scenarios().operator_commands;
    CHECK(apply_attack(s, ops, fx.net, kDay) == ops);
  }

  TEST_CASE("command block drops matching operator commands in the window") {
    const auto fx = test::demo();
    const CommandStream ops{operator_command(1000, "S1", SwitchState::open),
                            operator_command(2000, "S1", SwitchState::closed),
                            operator_command(5000, "S1", SwitchState::open)};
    AttackScenario s;
    s.id = "b";
    s.kind = AttackClass::command_block;
    s.targets = {"S1"};
    s.t_start = 0;
    s.t_end = 3600;
    s.block = BlockFilter::close;
    auto out = apply_attack(s, ops, fx.net, kDay);
    // The close is dropped; at 3600 S1 is put back to its baseline state.
    REQUIRE(out.size() == 3);
    CHECK(out[0] == ops[0]);
    CHECK(out[1] == ops[2]);
    CHECK(out[2].origin == Origin::attacker);
    CHECK(out[2].issue_time == 3600);
    CHECK(std::get<SwitchState>(out[2].action) == SwitchState::closed);

    s.block = BlockFilter::all;
    out = apply_attack(s, ops, fx.net, kDay);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == ops[2]);
  }

  TEST_CASE("forced open with restoration") {
    const auto fx = test::demo();
    const auto& f = test::demo_scenarios();
    const auto out = attacker_part(apply_attack(*f.find("block_b2"), {}, fx.net, kDay));
    REQUIRE(out.size() == 2);
    CHECK(out[0].issue_time == 36000);
    CHECK(std::get<SwitchState>(out[0].action) == SwitchState::open);
    CHECK(out[1].issue_time == 54000);
    CHECK(std::get<SwitchState>(out[1].action) == SwitchState::closed);
  }

  TEST_CASE("time delay transient on B2 injects the open/close pair") {
    const auto fx = test::demo();
    const auto s = delay_b2(21600, 25200, 0, Transient{SwitchState::open, 600});
    const auto out = apply_attack(s, {}, fx.net, kDay);
    REQUIRE(out.size() == 2);
    CHECK(out[0].target == "B2");
    CHECK(out[0].effective_time == 21600);
    CHECK(std::get<SwitchState>(out[0].action) == SwitchState::open);
    CHECK(out[1].effective_time == 22200);
    CHECK(std::get<SwitchState>(out[1].action) == SwitchState::closed);
  }

  TEST_CASE("time delay shifts effective time of commands in the window only") {
    const auto fx = test::demo();
    const CommandStream ops{operator_command(1000, "B2", SwitchState::open),
                            operator_command(4000, "B2", SwitchState::closed),
                            operator_command(1000, "B1", SwitchState::open)};
    const auto out = apply_attack(delay_b2(0, 3600, 300), ops, fx.net, kDay);
    REQUIRE(out.size() == 3);
    CHECK(out[0].issue_time == 1000);
    CHECK(out[0].effective_time == 1300);
    CHECK(out[1].effective_time == 4000);
    CHECK(out[2].effective_time == 1000);
  }

  TEST_CASE("idempotence") {
    const auto fx = test::demo();
    const auto f = test::demo_scenarios();
    for (const auto& s : f.scenarios) {
      CAPTURE(s.id);
      const auto once = apply_attack(s, f.operator_commands, fx.net, kDay);
      CHECK(apply_attack(s, once, fx.net, kDay) == once);
    }
  }

  TEST_CASE("validation") {
    const auto fx = test::demo();
    auto s = delay_b2(0, 3600, 0);
    CHECK_NOTHROW(validate_scenario(s, fx.net, kDay));

    auto bad = s;
    bad.t_end = kDay + 1;
    CHECK_THROWS_AS(validate_scenario(bad, fx.net, kDay), InputError);
    bad = s;
    bad.t_start = 3600;
    CHECK_THROWS_AS(validate_scenario(bad, fx.net, kDay), InputError);
    bad = s;
    bad.delay = -1;
    CHECK_THROWS_AS(validate_scenario(bad, fx.net, kDay), InputError);
    bad = s;
    bad.targets = {"pv_a3"};
    try {
      validate_scenario(bad, fx.net, kDay);
      FAIL("inverter accepted as switch target");
    } catch (const InputError& e) {
      CHECK(e.kind() == InputError::Kind::invariant);
    }
    bad.targets = {"nope"};
    try {
      validate_scenario(bad, fx.net, kDay);
      FAIL("unknown target accepted");
    } catch (const InputError& e) {
      CHECK(e.kind() == InputError::Kind::dangling_reference);
    }
    bad = s;
    bad.kind = AttackClass::data_tamper;
    CHECK_THROWS_AS(validate_scenario(bad, fx.net, kDay), InputError);
  }

  TEST_CASE("time delay postpones the effect of an operator open") {
    const auto fx = test::demo();
    const CommandStream ops{operator_command(9000, "S2", SwitchState::open)};
    AttackScenario s = delay_b2(8000, 10000, 1800);
    s.targets = {"S2"};
    const auto run = run_scenario(fx.net, fx.profiles, s, ops, {kDay, 900}, SolverConfig{});
    const auto s2 = *fx.net.find_device("S2");
    CHECK(run.baseline.steps[10].device_states[s2] == SwitchState::open);
    CHECK(run.attacked.steps[10].device_states[s2] == SwitchState::closed);
    CHECK(run.attacked.steps[11].device_states[s2] == SwitchState::closed);
    CHECK(run.attacked.steps[12].device_states[s2] == SwitchState::open);
  }

  TEST_CASE("forced open on the feeder head leaves loads unserved in the window only") {
    const auto fx = test::demo();
    const auto f = test::demo_scenarios();
    const auto r = run_scenario(fx.net, fx.profiles, *f.find("block_b2"), f.operator_commands,
                                {kDay, 900}, SolverConfig{});
    for (std::size_t k = 0; k < 96; ++k) {
      CAPTURE(k);
      const bool in = k >= 40 && k < 60;
      const auto& served = r.attacked.steps[k].load_served;
      std::size_t unserved = 0;
      for (std::size_t l = 0; l < served.size(); ++l)
        if (!served[l] && fx.net.loads()[l].id.rfind("lb", 0) == 0) ++unserved;
      if (in)
        CHECK(unserved == 8);
      else
        CHECK(unserved == 0);
    }
  }

  TEST_CASE("replay") {
    const auto fx = test::demo();
    const auto ops = test::demo_scenarios().operator_commands;
    CHECK(replay_state(fx.net, ops, "S1", 28800) == SwitchState::closed);
    CHECK(replay_state(fx.net, ops, "S1", 28801) == SwitchState::open);
    CHECK(replay_state(fx.net, ops, "S1", 40000) == SwitchState::closed);
  }
}
