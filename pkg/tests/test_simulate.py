import numpy as np
import pytest
from conftest import shortened

from hqnet.errors import ConfigError, WindowOverflow
from hqnet.link import GatingConfig
from hqnet.simulate import BLOCK_CYCLES, WindowSchedule, generate, multimode_windows
from hqnet.timetags import CH_HERALD, CH_SIGNAL


def test_identical_streams_for_any_job_count(passthrough_cfg):
    cfg = shortened(passthrough_cfg, 0.5, seed=42)
    one = generate(cfg, jobs=1)
    par = generate(cfg, jobs=4)
    assert np.array_equal(one.timestamps_ps, par.timestamps_ps)
    assert np.array_equal(one.channels, par.channels)
    assert np.array_equal(one.raw_herald_ps, par.raw_herald_ps)
    # covers more than one RNG block
    assert one.meta["n_cycles"] > BLOCK_CYCLES


def test_same_seed_reproduces_different_seed_differs(passthrough_cfg):
    cfg = shortened(passthrough_cfg, 0.1, seed=5)
    a = generate(cfg)
    b = generate(cfg)
    assert np.array_equal(a.timestamps_ps, b.timestamps_ps)
    c = generate(cfg, seed=6)
    assert not np.array_equal(a.timestamps_ps, c.timestamps_ps)
    assert a.meta["seed"] == 5 and c.meta["seed"] == 6


def test_stream_is_sorted_and_bounded(storage_stream):
    storage_stream.check_sorted()
    assert storage_stream.duration_ps() < storage_stream.meta["n_cycles"] * 2_000_000
    assert storage_stream.meta["n_herald"] == storage_stream.channel(CH_HERALD).size
    assert storage_stream.meta["n_signal"] == storage_stream.channel(CH_SIGNAL).size


def test_heralds_confined_to_electronic_windows(passthrough_stream):
    h = passthrough_stream.channel(CH_HERALD).astype(np.int64)
    assert h.size > 0
    assert np.all(np.mod(h, 2_000_000) < 800_000)
    # the raw record keeps heralds from the closed part of the cycle too
    raw = np.asarray(passthrough_stream.raw_herald_ps).astype(np.int64)
    assert raw.size > h.size
    closed = np.mod(raw, 2_000_000) >= 800_000
    assert closed.sum() > 0


def test_passthrough_signals_confined_to_open_gate(passthrough_stream):
    # no memory echo, no fiber delay, no darks: every signal detection sits
    # inside an open optical gate
    s = passthrough_stream.channel(CH_SIGNAL).astype(np.int64)
    assert s.size > 0
    assert np.all(np.mod(s, 2_000_000) < 800_000)


def test_echoes_populate_the_closed_segment(storage_stream):
    s = storage_stream.channel(CH_SIGNAL).astype(np.int64)
    phase = np.mod(s, 2_000_000)
    closed = (phase > 810_000) & (phase < 1_190_000)
    # darks alone would leave only a few hundred counts here
    dark_expect = 100.0 * storage_stream.meta["active_s"] * 0.19
    assert closed.sum() > 5 * dark_expect


def test_counts_track_scenario_rates(passthrough_cfg):
    cfg = shortened(passthrough_cfg, 1.0, seed=3)
    stream = generate(cfg)
    active = stream.meta["active_s"]
    duty_gate = 0.8 / 2.0
    expect_h = cfg.source.herald_singles_cps * active * duty_gate
    got_h = stream.meta["n_herald"]
    assert abs(got_h - expect_h) < 5 * np.sqrt(expect_h)
    transmit = cfg.storage().transmit_prob
    expect_s = cfg.source.signal_singles_cps * active * duty_gate * transmit
    got_s = stream.meta["n_signal"]
    assert abs(got_s - expect_s) < 5 * np.sqrt(expect_s)


def test_stream_meta_fields(storage_cfg, storage_stream):
    from hqnet.scenario import scenario_hash

    meta = storage_stream.meta
    assert meta["scenario_hash"] == scenario_hash(storage_cfg)
    assert meta["storage_time_ps"] == 1_010_000
    assert meta["fiber_delay_ps"] == 0
    assert meta["n_cycles"] == int(round(2.0 * 0.476 / 2e-6))


def test_window_schedule_mode_of():
    ws = WindowSchedule(cycle_ps=2_000_000, slot_ps=20_000, n_modes=37, offset_ps=0)
    t = [10_000, 20_000, 739_999, 740_000, 2_030_000, 1_999_999]
    assert list(ws.mode_of(t)) == [0, 1, 36, -1, 1, -1]
    off = WindowSchedule(cycle_ps=2_000_000, slot_ps=20_000, n_modes=2, offset_ps=250_000)
    assert list(off.mode_of([250_000, 269_999, 270_000, 291_000])) == [0, 0, 1, -1]


def test_multimode_windows_construction():
    g = GatingConfig(t_on_us=0.8, t_off_us=1.2)
    ws = multimode_windows(g, 37, 20.0)
    assert ws.n_modes == 37 and ws.slot_ps == 20_000 and ws.cycle_ps == 2_000_000
    assert multimode_windows(g, 40, 20.0).n_modes == 40  # exactly fills the gate
    with pytest.raises(WindowOverflow):
        multimode_windows(g, 41, 20.0)
    with pytest.raises(ConfigError):
        multimode_windows(g, 0, 20.0)
    with pytest.raises(ConfigError):
        multimode_windows(g, 5, 0.0)


def test_invalid_scenario_rejected_before_generation(storage_cfg):
    import dataclasses

    bad_gate = dataclasses.replace(storage_cfg, gating=GatingConfig(t_on_us=1.1, t_off_us=1.2))
    with pytest.raises(ConfigError, match="gating"):
        generate(shortened(bad_gate, 0.1))
