import argparse
import json
import os

import numpy as np
import pytest
from conftest import shortened

from hqnet.cli import SweepSpec, _jobs, main, set_scenario_value, sweep_table
from hqnet.errors import ConfigError
from hqnet.scenario import (
    load_named_scenario,
    operating_points_path,
    save_scenario,
    scenario_hash,
)
from hqnet.timetags import read_hqtt, read_metadata


@pytest.fixture()
def short_scenario(tmp_path, storage_cfg):
    path = tmp_path / "scenario.toml"
    save_scenario(shortened(storage_cfg, 1.0), path)
    return str(path)


def test_simulate_then_analyze_round_trip(tmp_path, short_scenario):
    stream_path = str(tmp_path / "run.hqtt")
    rc = main(["simulate", "--scenario", short_scenario, "--out", stream_path, "--seed", "5"])
    assert rc == 0
    stream = read_hqtt(stream_path)
    assert len(stream) > 0
    meta = read_metadata(stream_path)
    assert meta["seed"] == 5
    assert meta["scenario_hash"] == scenario_hash(load_named_scenario("storage_retrieval"))

    json_path = str(tmp_path / "out.json")
    prefix = str(tmp_path / "hist")
    rc = main([
        "analyze", "--in", stream_path, "--scenario", short_scenario,
        "--out", json_path, "--csv-prefix", prefix,
    ])
    assert rc == 0
    out = json.loads(open(json_path).read())
    assert out["seed"] == 5
    assert out["scenario_hash"] == meta["scenario_hash"]
    assert out["time_bandwidth_product"] == pytest.approx(120.238, abs=0.01)
    assert out["direct"]["g2_max"] > 10.0
    assert out["echo"]["g2_max"] > 1.0
    assert out["echo_rate_cps"]["value"] > 0
    assert out["heralded_auto_g2"]["value"] < 0.5
    assert os.path.exists(prefix + "_direct.csv")
    assert os.path.exists(prefix + "_echo.csv")


def test_analyze_hash_mismatch(tmp_path, short_scenario, storage_cfg):
    stream_path = str(tmp_path / "run.hqtt")
    assert main(["simulate", "--scenario", short_scenario, "--out", stream_path, "--seed", "1"]) == 0
    other = tmp_path / "other.toml"
    import dataclasses

    changed = dataclasses.replace(
        shortened(storage_cfg, 1.0),
        source=dataclasses.replace(storage_cfg.source, pair_rate_cps=47_000.0),
    )
    save_scenario(changed, other)
    assert main(["analyze", "--in", stream_path, "--scenario", str(other)]) == 2
    assert main(["analyze", "--in", stream_path, "--scenario", str(other), "--force"]) == 0


def test_simulate_duration_override_and_drawn_seed(tmp_path, short_scenario, capsys):
    stream_path = str(tmp_path / "short.hqtt")
    rc = main([
        "simulate", "--scenario", short_scenario, "--out", stream_path,
        "--duration", "0.5",
    ])
    assert rc == 0
    assert "no --seed given" in capsys.readouterr().err
    meta = read_metadata(stream_path)
    assert meta["duration_s"] == 0.5


def test_sweep_writes_csv(tmp_path, short_scenario):
    out = tmp_path / "sweep.csv"
    rc = main([
        "sweep", "--scenario", short_scenario, "--param", "link.length_km",
        "--values", "0,25", "--metric", "echo_rate", "--seed", "1",
        "--out", str(out),
    ])
    assert rc == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "value,mean,stderr,n"
    table = np.loadtxt(rows[1:], delimiter=",").reshape(-1, 4)
    assert table[:, 0].tolist() == [0.0, 25.0]
    # 8 dB of fiber cuts the echo rate well below the short-span value
    assert table[1, 1] < 0.5 * table[0, 1]
    assert np.all(table[:, 3] == 1)


def test_sweep_operating_table(tmp_path, passthrough_cfg):
    scen = tmp_path / "pass.toml"
    save_scenario(shortened(passthrough_cfg, 1.0), scen)
    out = tmp_path / "ops.csv"
    rc = main([
        "sweep", "--scenario", str(scen), "--param", "source.delta2_mhz",
        "--values", "503,903", "--metric", "g2_hs", "--seed", "3",
        "--operating-table", str(operating_points_path()), "--out", str(out),
    ])
    assert rc == 0
    table = np.loadtxt(out.read_text().strip().splitlines()[1:], delimiter=",").reshape(-1, 4)
    # far-detuned pumping trades rate for much higher pair correlation
    assert table[0, 1] < 25.0
    assert table[1, 1] > 60.0


def test_sweep_table_validation(storage_cfg):
    cfg = shortened(storage_cfg, 0.2)
    with pytest.raises(ConfigError, match="at least one value"):
        sweep_table(cfg, SweepSpec("link.length_km", ()), "echo_rate")
    with pytest.raises(ConfigError, match="repeats"):
        sweep_table(cfg, SweepSpec("link.length_km", (0.0,), 0), "echo_rate")
    with pytest.raises(ConfigError, match="does not resolve"):
        sweep_table(cfg, SweepSpec("link.bogus", (0.0,)), "echo_rate")
    with pytest.raises(ConfigError, match="unknown metric"):
        sweep_table(cfg, SweepSpec("link.length_km", (0.0,)), "sparkle")


def test_set_scenario_value(storage_cfg):
    c = set_scenario_value(storage_cfg, "link.length_km", 10.0)
    assert c.link.length_km == 10.0
    assert storage_cfg.link.length_km == 0.0
    c = set_scenario_value(storage_cfg, "run.duration_s", 3.0)
    assert c.run.duration_s == 3.0
    with pytest.raises(ConfigError, match="no such field"):
        set_scenario_value(storage_cfg, "link.sparkles", 1.0)
    with pytest.raises(ConfigError):
        set_scenario_value(storage_cfg, "link.length_km", -5.0)


def test_design_afc_report(tmp_path):
    out = tmp_path / "design.json"
    rc = main(["design-afc", "--tooth-depth", "4.5", "--out", str(out)])
    assert rc == 0
    rep = json.loads(out.read_text())
    assert rep["optimal_finesse"] == pytest.approx(4.0207, abs=1e-3)
    assert rep["optimal_efficiency"] == pytest.approx(0.2633, abs=1e-3)
    assert len(rep["table"]) == 5
    row = next(r for r in rep["table"] if abs(r["comb_spacing_mhz"] - 0.990099) < 1e-6)
    assert row["storage_time_us"] == pytest.approx(1.01, rel=1e-4)
    assert rep["warnings"] == []
    assert 0.9 < rep["in_band_fraction"] <= 1.0


def test_design_afc_wide_input_warns(capsys):
    rc = main(["design-afc", "--tooth-depth", "4.5", "--input-fwhm", "150"])
    assert rc == 0
    cap = capsys.readouterr()
    assert "cannot be stored" in cap.err
    rep = json.loads(cap.out)
    assert rep["warnings"]


def test_levels_report(tmp_path, capsys):
    out = tmp_path / "band.csv"
    rc = main(["levels", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "V_near+: central gap 10.8521 MHz, optical spacing 368.28 kHz" in text
    assert "optical spacing 50.83 kHz" in text
    assert "combination band span: 498.4 MHz" in text
    rows = out.read_text().splitlines()
    assert rows[0] == "frequency_mhz_center,counts"
    counts = np.loadtxt(rows[1:], delimiter=",")[:, 1]
    assert counts.sum() == 8**6


def test_levels_includes_yttrium(capsys):
    assert main(["levels", "--include-yttrium"]) == 0
    text = capsys.readouterr().out
    assert "Y_near" in text and "Y_next" in text


def test_match_table(tmp_path, short_scenario):
    out = tmp_path / "match.csv"
    rc = main([
        "match", "--scenario", short_scenario, "--delta2", "503,903",
        "--out", str(out),
    ])
    assert rc == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "delta2_mhz,center_shift_mhz,in_band_fraction"
    table = np.loadtxt(rows[1:], delimiter=",").reshape(-1, 3)
    assert np.all((table[:, 2] > 0) & (table[:, 2] < 1))
    # moving the pump back toward the working point recenters the spectrum
    assert table[1, 2] > table[0, 2]


def test_exit_codes(tmp_path, short_scenario):
    # missing files surface as i/o errors
    assert main(["simulate", "--scenario", str(tmp_path / "nope.toml"), "--out", "x"]) == 3
    assert main(["analyze", "--in", str(tmp_path / "nope.hqtt"), "--scenario", short_scenario]) == 3
    # invalid configuration surfaces as a config error
    bad = tmp_path / "bad.toml"
    bad.write_text(open(short_scenario).read().replace("[link]", "[link]\nbogus = 1"))
    assert main(["simulate", "--scenario", str(bad), "--out", str(tmp_path / "y.hqtt"), "--seed", "1"]) == 2


def test_jobs_resolution(monkeypatch):
    ns = argparse.Namespace(jobs=None)
    monkeypatch.delenv("HQNET_JOBS", raising=False)
    assert _jobs(ns) == 1
    monkeypatch.setenv("HQNET_JOBS", "6")
    assert _jobs(ns) == 6
    assert _jobs(argparse.Namespace(jobs=2)) == 2
    monkeypatch.setenv("HQNET_JOBS", "zebra")
    with pytest.raises(ConfigError, match="HQNET_JOBS"):
        _jobs(ns)
