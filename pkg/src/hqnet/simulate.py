"""Monte-Carlo generation of detector time-tag streams for a link scenario.

Time is integer picoseconds. Pairs are emitted continuously; the signal
branch is optically gated at the memory node (direct transmission only while
the gate is open, echoes re-emitted one storage time later regardless of the
gate), while the herald branch is electronically windowed. Every random draw
comes from a counter-based Philox stream keyed by (seed, block index), where
a block is a fixed slice of 4096 gating cycles — streams are therefore
bit-identical for a given (scenario, seed) under any job count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from ._constants import FWHM_SIGMA
from .errors import ConfigError, WindowOverflow
from .link import fiber_delay_s, fiber_transmission
from .scenario import ScenarioConfig, scenario_hash
from .timetags import CH_HERALD, CH_SIGNAL, TimeTagStream

BLOCK_CYCLES = 4096  # RNG block size; fixed so results never depend on jobs
_ECHO_CLIP_SIGMA = 5.0


@dataclass(frozen=True)
class WindowSchedule:
    """Temporal mode slots tiling the start of each herald window."""

    cycle_ps: int
    slot_ps: int
    n_modes: int
    offset_ps: int  # electronic window start within the cycle

    def mode_of(self, timestamps_ps):
        """Mode index per timestamp, -1 outside every slot."""
        t = np.asarray(timestamps_ps).astype(np.int64)
        phase = np.mod(t - self.offset_ps, self.cycle_ps)
        idx = phase // self.slot_ps
        return np.where(idx < self.n_modes, idx, -1).astype(np.int64)


def multimode_windows(gating, n_modes, slot_ns) -> WindowSchedule:
    """Partition each open gate into n_modes slots of slot_ns nanoseconds."""
    if n_modes < 1:
        raise ConfigError("n_modes must be >= 1")
    slot_ps = int(round(slot_ns * 1e3))
    if slot_ps <= 0:
        raise ConfigError("slot must be > 0")
    ton_ps = int(round(gating.t_on_us * 1e6))
    if n_modes * slot_ps > ton_ps:
        raise WindowOverflow(
            f"{n_modes} slots of {slot_ns} ns exceed the {gating.t_on_us} us gate"
        )
    return WindowSchedule(
        cycle_ps=int(round(gating.cycle_us * 1e6)),
        slot_ps=slot_ps,
        n_modes=int(n_modes),
        offset_ps=int(round(gating.tau_d_us * 1e6)),
    )


@dataclass(frozen=True)
class _Params:
    """Scenario constants pre-reduced to simulation units."""

    cycle_ps: int
    ton_ps: int
    tau_d_ps: int
    tau_afc_ps: int
    echo_sigma_ps: float
    fiber_delay_ps: int
    pair_rate: float
    extra_herald_rate: float
    extra_signal_rate: float
    tau_c_ps: float
    eff_herald: float
    p_signal_path: float
    p_echo: float
    p_transmit: float
    herald_dark: float
    signal_dark: float


def _params(cfg: ScenarioConfig) -> _Params:
    cfg.validate_for_simulation()
    outcome = cfg.storage()
    src, det = cfg.source, cfg.detectors
    return _Params(
        cycle_ps=int(round(cfg.gating.cycle_us * 1e6)),
        ton_ps=int(round(cfg.gating.t_on_us * 1e6)),
        tau_d_ps=int(round(cfg.gating.tau_d_us * 1e6)),
        tau_afc_ps=int(round(cfg.storage_time_us() * 1e6)),
        echo_sigma_ps=cfg.echo_fwhm_ns() * 1e3 / FWHM_SIGMA,
        fiber_delay_ps=int(round(fiber_delay_s(cfg.link) * 1e12)),
        pair_rate=src.pair_rate_cps,
        extra_herald_rate=src.herald_singles_cps - src.pair_rate_cps,
        extra_signal_rate=src.signal_singles_cps - src.pair_rate_cps,
        tau_c_ps=src.correlation_time_ns * 1e3,
        eff_herald=det.herald_efficiency,
        p_signal_path=fiber_transmission(cfg.link) * det.signal_efficiency,
        p_echo=outcome.echo_prob,
        p_transmit=outcome.transmit_prob,
        herald_dark=det.herald_dark_cps,
        signal_dark=det.signal_dark_cps,
    )


def _block_events(p: _Params, seed, block, n_cyc, end_ps):
    """Generate one block; returns (raw_herald, gated_herald, signal) int64 ps."""
    rng = np.random.Generator(
        np.random.Philox(key=(np.uint64(seed).item() << 64) + block)
    )
    start_ps = block * BLOCK_CYCLES * p.cycle_ps
    span_ps = n_cyc * p.cycle_ps
    span_s = span_ps * 1e-12

    heralds = []
    signals = []

    # correlated pairs, CW emission
    n_pairs = rng.poisson(p.pair_rate * span_s)
    t_emit = rng.random(n_pairs) * span_ps
    delta = rng.laplace(0.0, p.tau_c_ps, n_pairs)
    herald_seen = rng.random(n_pairs) < p.eff_herald
    path_seen = rng.random(n_pairs) < p.p_signal_path
    branch = rng.random(n_pairs)
    jitter = rng.normal(0.0, p.echo_sigma_ps, n_pairs)

    heralds.append(np.rint(t_emit[herald_seen]).astype(np.int64))
    t_aom = np.rint(t_emit + delta).astype(np.int64)
    open_gate = np.mod(t_aom, p.cycle_ps) < p.ton_ps
    arrived = open_gate & path_seen
    is_echo = arrived & (branch < p.p_echo)
    is_pass = arrived & ~is_echo & (branch < p.p_echo + p.p_transmit)
    signals.append(t_aom[is_pass] + p.fiber_delay_ps)
    clip = _ECHO_CLIP_SIGMA * p.echo_sigma_ps
    echo_t = (
        t_aom[is_echo]
        + p.fiber_delay_ps
        + p.tau_afc_ps
        + np.rint(np.clip(jitter[is_echo], -clip, clip)).astype(np.int64)
    )
    signals.append(echo_t)

    # uncorrelated source photons on the herald channel
    n_hx = rng.poisson(p.extra_herald_rate * span_s)
    t_hx = rng.random(n_hx) * span_ps
    hx_seen = rng.random(n_hx) < p.eff_herald
    heralds.append(np.rint(t_hx[hx_seen]).astype(np.int64))

    # uncorrelated source photons on the signal channel: same optical path
    n_sx = rng.poisson(p.extra_signal_rate * span_s)
    t_sx = np.rint(rng.random(n_sx) * span_ps).astype(np.int64)
    sx_path = rng.random(n_sx) < p.p_signal_path
    sx_branch = rng.random(n_sx)
    sx_jitter = rng.normal(0.0, p.echo_sigma_ps, n_sx)
    sx_open = np.mod(t_sx, p.cycle_ps) < p.ton_ps
    sx_ok = sx_open & sx_path
    sx_echo = sx_ok & (sx_branch < p.p_echo)
    sx_pass = sx_ok & ~sx_echo & (sx_branch < p.p_echo + p.p_transmit)
    signals.append(t_sx[sx_pass] + p.fiber_delay_ps)
    signals.append(
        t_sx[sx_echo]
        + p.fiber_delay_ps
        + p.tau_afc_ps
        + np.rint(np.clip(sx_jitter[sx_echo], -clip, clip)).astype(np.int64)
    )

    # dark counts: herald darks face the electronic window only, signal darks
    # bypass the optical gate entirely
    n_hd = rng.poisson(p.herald_dark * span_s)
    heralds.append(np.rint(rng.random(n_hd) * span_ps).astype(np.int64))
    n_sd = rng.poisson(p.signal_dark * span_s)
    signals.append(np.rint(rng.random(n_sd) * span_ps).astype(np.int64))

    raw_herald = np.concatenate(heralds) + start_ps
    signal = np.concatenate(signals) + start_ps
    raw_herald = raw_herald[(raw_herald >= 0) & (raw_herald < end_ps)]
    signal = signal[(signal >= 0) & (signal < end_ps)]

    windowed = np.mod(raw_herald - p.tau_d_ps, p.cycle_ps) < p.ton_ps
    return raw_herald, raw_herald[windowed], signal


def generate(cfg: ScenarioConfig, seed=None, jobs=1) -> TimeTagStream:
    """Simulate one run; returns the sorted two-channel detection stream.

    Channel 0 carries electronically windowed heralds, channel 1 the signal
    detections (direct transmissions, echoes, darks). The un-windowed herald
    record is kept on the stream's raw_herald_ps attribute.
    """
    if seed is None:
        seed = cfg.run.seed
    p = _params(cfg)
    active_s = cfg.run.duration_s * cfg.run.duty
    n_cycles = max(1, int(round(active_s / (p.cycle_ps * 1e-12))))
    end_ps = n_cycles * p.cycle_ps
    n_blocks = (n_cycles + BLOCK_CYCLES - 1) // BLOCK_CYCLES

    def run_block(b):
        n_cyc = min(BLOCK_CYCLES, n_cycles - b * BLOCK_CYCLES)
        return _block_events(p, seed, b, n_cyc, end_ps)

    if jobs and jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]

    raw_herald = np.concatenate([pt[0] for pt in parts])
    gated = np.concatenate([pt[1] for pt in parts])
    signal = np.concatenate([pt[2] for pt in parts])
    raw_herald.sort(kind="stable")

    times = np.concatenate([gated, signal])
    chans = np.concatenate(
        [
            np.full(gated.size, CH_HERALD, dtype=np.uint8),
            np.full(signal.size, CH_SIGNAL, dtype=np.uint8),
        ]
    )
    order = np.argsort(times, kind="stable")
    stream = TimeTagStream(
        timestamps_ps=times[order].astype(np.uint64),
        channels=chans[order],
        n_channels=2,
        meta={
            "scenario_hash": scenario_hash(cfg),
            "seed": int(seed),
            "duration_s": cfg.run.duration_s,
            "active_s": n_cycles * p.cycle_ps * 1e-12,
            "n_cycles": int(n_cycles),
            "fiber_delay_ps": int(p.fiber_delay_ps),
            "storage_time_ps": int(p.tau_afc_ps),
            "n_herald": int(gated.size),
            "n_signal": int(signal.size),
        },
        raw_herald_ps=raw_herald.astype(np.uint64),
    )
    return stream
