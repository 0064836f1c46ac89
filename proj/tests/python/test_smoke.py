import os
import pathlib
import subprocess
import sys

import pytest

import tdsec

DATA = pathlib.Path(os.environ.get("TDSEC_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))
NET = str(DATA / "demo" / "network.yaml")
SCN = str(DATA / "demo" / "scenarios.yaml")


def test_load_and_round_trip():
    net = tdsec.load_network(NET)
    assert len(net.bus_ids) == 20
    assert net.device_ids == ["B1", "B2", "R1", "R2", "S1", "S2"]
    assert sorted(net.feeder_ids) == ["A", "B"]
    assert tdsec.parse_network(net.serialize()) == net


def test_input_errors_are_value_errors():
    with pytest.raises(tdsec.InputError, match="/no/such/file.yaml"):
        tdsec.load_network("/no/such/file.yaml")
    with pytest.raises(ValueError, match="cycle"):
        tdsec.load_network(str(DATA / "fixtures" / "meshed_feeder.yaml"))


def test_solve_balances_power():
    sol = tdsec.solve(str(DATA / "fixtures" / "minimal.yaml"), 12 * 3600.0)
    assert sol["voltage_pu"]["t1"] == pytest.approx(1.0)
    assert abs(sol["power_balance_residual"]) < 1e-6


def test_tamper_scenario():
    r = tdsec.run_scenario(NET, SCN, "tamper_all")
    assert r["failed_steps"] == 0
    assert r["delta_total"] > 0
    steps = r["delta_per_step"]
    assert len(steps) == 96
    assert min(steps) >= 0
    assert max(steps) > steps[0] and max(steps) > steps[-1]


def test_noop_scenario():
    assert tdsec.run_scenario(NET, SCN, "noop")["delta_total"] == 0


def test_sweep_ranks_feeder_b_head_first():
    ranked = tdsec.sweep(NET, SCN, workers=2)
    assert ranked[0]["device"] == "B2"
    assert {e["device"] for e in ranked} == {"B1", "B2", "R1", "R2", "S1", "S2"}


def test_stealth_windows():
    w = tdsec.stealth_windows(600, [(900, 0)], 3600)
    assert w[0] == (0.0, 300.0, True)
    assert w[1] == (900.0, 1200.0, True)
    assert tdsec.stealth_windows(600, [(900, 0), (900, 450)], 86400) == []


def test_risk():
    assert tdsec.severity([5, 4, 3, 2, 1], [1, 3, 1, 3, 1]) == 27
    assert tdsec.risk_score("medium", 27) == 54
    assert [r["risk"] for r in tdsec.rank_catalog()] == [54, 31, 30]
    assert [r["risk"] for r in tdsec.rank_catalog(str(DATA / "catalog" / "table1.yaml"))] == [54, 31, 30]


def test_cli_entry_point(capsys):
    assert tdsec.main(["validate", "--network", NET, "--scenario", SCN]) == 0
    assert tdsec.main(["risk"]) == 0
    assert "Solar Inverters" in capsys.readouterr().out


def test_module_runs_in_a_subprocess():
    code = "import tdsec, sys; sys.exit(0 if tdsec.risk_score('high', 10) == 30 else 1)"
    subprocess.run([sys.executable, "-c", code], check=True, env=os.environ.copy())
