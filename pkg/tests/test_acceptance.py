"""End-to-end checks of the package's headline quantitative behavior.

Each test prints one [PASS]/[FAIL] line on the live console so a full run
reads as a checklist; the asserts enforce exactly the printed conditions.
Numbered prefixes only fix the execution order.
"""

import contextlib
import dataclasses
import itertools
import math

import numpy as np
import pytest
import scipy.stats

from conftest import shortened
from hqnet.analysis import (
    cauchy_schwarz,
    coincidence_histogram,
    cross_g2,
    heralded_auto_g2,
    loss_budget,
    multimode_stats,
    noise_budget,
    windowed_rate,
)
from hqnet.cli import SweepSpec, set_scenario_value, sweep_table
from hqnet.histogram import Histogram
from hqnet.link import FiberConfig, validate_gating
from hqnet.memory import (
    ErTransitionConfig,
    afc_efficiency,
    electron_polarization,
    optimal_finesse,
    zeeman_shift,
)
from hqnet.scenario import load_named_scenario
from hqnet.simulate import generate, multimode_windows
from hqnet.source import mean_pair_number
from hqnet.superhyperfine import (
    band_span_mhz,
    band_spectrum,
    dipolar_field,
    spin_levels,
    transition_spacing,
    vanadium_sites,
)
from hqnet.timetags import (
    CH_HERALD,
    CH_SIGNAL,
    TimeTagStream,
    read_hqtt,
    read_metadata,
    write_hqtt,
    write_metadata,
)


class _Record:
    def __init__(self):
        self.failures = []
        self.notes = []

    def check(self, ok, label):
        if not ok:
            self.failures.append(label)
        return bool(ok)

    def note(self, text):
        self.notes.append(text)


@contextlib.contextmanager
def verdict(capsys, num, label):
    """Collect checks for one headline item and print its single line."""
    rec = _Record()
    try:
        yield rec
    except BaseException as exc:
        with capsys.disabled():
            print(f"[FAIL] {num:02d} {label}: {type(exc).__name__}: {exc}")
        raise
    tag = "PASS" if not rec.failures else "FAIL"
    detail = "; ".join(rec.failures if rec.failures else rec.notes)
    with capsys.disabled():
        print(f"[{tag}] {num:02d} {label}" + (f": {detail}" if detail else ""))
    assert not rec.failures, "; ".join(rec.failures)


def _mk_stream(heralds, signals, meta=None):
    t = np.concatenate([np.asarray(heralds), np.asarray(signals)]).astype(np.int64)
    ch = np.concatenate(
        [
            np.full(len(heralds), CH_HERALD, dtype=np.uint8),
            np.full(len(signals), CH_SIGNAL, dtype=np.uint8),
        ]
    )
    order = np.argsort(t, kind="stable")
    return TimeTagStream(t[order].astype(np.uint64), ch[order], meta=meta or {})


def _weighted_slope(x, y, err):
    """WLS slope; the error is inflated by sqrt(chi2/dof) when scatter
    exceeds the per-point errors, so a zero-slope test stays honest even if
    the individual error bars are mildly optimistic."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = 1.0 / np.asarray(err, float) ** 2
    xm = np.sum(w * x) / np.sum(w)
    denom = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * y) / denom)
    serr = math.sqrt(1.0 / denom)
    fitted = np.sum(w * y) / np.sum(w) + slope * (x - xm)
    chi2 = float(np.sum(w * (y - fitted) ** 2))
    dof = max(x.size - 2, 1)
    return slope, serr * max(1.0, math.sqrt(chi2 / dof))


def test_a01_comb_recall_efficiency_and_optimum(capsys):
    with verdict(capsys, 1, "comb recall efficiency and optimum") as c:
        eta = afc_efficiency(4.5, 3.0)
        c.check(abs(eta - 0.2276) <= 1e-4, f"eta(4.5, F=3) = {eta:.6f} not 0.2276 +- 1e-4")
        f_star, eta_star = optimal_finesse(4.5)
        c.check(abs(f_star - 4.02) <= 0.01, f"F* = {f_star:.4f} not 4.02 +- 0.01")
        c.check(abs(eta_star - 0.263) <= 1e-3, f"eta* = {eta_star:.5f} not 0.263 +- 0.001")
        h = 1e-4
        slope = (afc_efficiency(4.5, f_star + h) - afc_efficiency(4.5, f_star - h)) / (2 * h)
        c.check(abs(slope) < 1e-8 * eta_star, f"|deta/dF| = {abs(slope):.2e} at F*")
        dense = max(afc_efficiency(4.5, f) for f in np.linspace(1.0, 20.0, 20001))
        c.check(dense <= eta_star + 1e-9, f"dense scan beats closed form by {dense - eta_star:.2e}")
        c.note(f"eta(F=3)={eta:.6f}, F*={f_star:.4f}, eta*={eta_star:.5f}, |deta/dF|={abs(slope):.1e}")


def test_a02_optical_field_shift_and_spin_polarization(capsys):
    with verdict(capsys, 2, "optical field shift and spin polarization") as c:
        shift = float(zeeman_shift(ErTransitionConfig(), 1.0))
        c.check(abs(shift - (-6.788)) <= 0.005 * 6.788, f"shift {shift:.4f} GHz not -6.788 +- 0.5%")
        c.check(6.4 <= abs(shift) <= 6.8, f"|shift| {abs(shift):.3f} GHz outside [6.4, 6.8]")
        pol = float(electron_polarization(46.7, 0.150))
        c.check(abs(pol - 0.9999997) <= 1e-7, f"polarization {pol:.9f} not 0.9999997 +- 1e-7")
        c.note(f"shift={shift:.4f} GHz, polarization={pol:.8f}")


def test_a03_nuclear_site_structure_and_combination_band(capsys):
    with verdict(capsys, 3, "nuclear site structure and combination band") as c:
        sites = vanadium_sites()
        near = sites[0]
        gap = spin_levels(near, dipolar_field(near, 3.54, 1.0)).central_gap_mhz()
        c.check(abs(gap - 10.9) <= 0.2, f"central gap {gap:.3f} MHz not 10.9 +- 0.2")
        spacing = transition_spacing(near, 3.54, 4.51, 1.0)
        c.check(abs(spacing - 351.0) <= 0.15 * 351.0, f"spacing {spacing:.1f} kHz not 351 +- 15%")
        span = band_span_mhz(sites, 3.54, 1.0)
        c.check(abs(span - 500.0) <= 0.10 * 500.0, f"band span {span:.1f} MHz not 500 +- 10%")
        hist = band_spectrum(sites, 3.54, 1.0, bin_mhz=1.0)
        ladders = [spin_levels(s, dipolar_field(s, 3.54, 1.0)).energies_mhz for s in sites]
        sums = np.fromiter(
            (sum(combo) for combo in itertools.product(*ladders)), float, count=8**6
        )
        idx = np.floor((sums - hist.start) / hist.bin_width).astype(int)
        brute = np.bincount(idx, minlength=hist.counts.size)
        c.check(np.array_equal(brute, hist.counts), "band spectrum differs from enumeration")
        c.check(hist.total() == 8**6, f"band total {hist.total()} not 8^6")
        c.note(f"gap={gap:.3f} MHz, spacing={spacing:.1f} kHz, span={span:.1f} MHz, 8^6 exact")


def test_a04_gated_background_shape_and_echo_placement(capsys):
    with verdict(capsys, 4, "gated background shape and echo placement") as c:
        base = load_named_scenario("source_characterization")
        src = dataclasses.replace(
            base.source,
            pair_rate_cps=250_000.0,
            herald_singles_cps=250_000.0,
            signal_singles_cps=250_000.0,
            g2_cross_max=6251.0,
        )
        run = dataclasses.replace(base.run, duration_s=4.0, duty=1.0, seed=404)
        cfg = dataclasses.replace(base, source=src, run=run)
        stream = generate(cfg, jobs=2)
        hist = coincidence_histogram(
            stream, bin_ps=10_000, range_ps=1_200_000, center_ps=900_000
        )
        # analytic per-bin expectation: cyclic gate-overlap shape integrated
        # over each bin (trapezoid on a 40x subgrid)
        g = cfg.gating
        fine = np.linspace(hist.start, hist.end, hist.counts.size * 40 + 1)
        u = np.mod(fine * 1e-6, g.cycle_us)
        lam_us = np.clip(g.t_on_us - u, 0.0, None) + np.clip(u - g.t_off_us, 0.0, None)
        dens = stream.meta["n_herald"] * cfg.source.signal_singles_cps * 1e-12 * lam_us / g.t_on_us
        mu = np.add.reduceat(
            (dens[:-1] + dens[1:]) / 2.0 * np.diff(fine),
            np.arange(0, fine.size - 1, 40),
        )
        centers = hist.centers()
        usable = (np.abs(centers) >= 16_000) & (mu > 20.0)
        red = float(np.sum((hist.counts[usable] - mu[usable]) ** 2 / mu[usable])) / int(usable.sum())
        c.check(0.7 <= red <= 1.3, f"reduced chi2 {red:.3f} outside [0.7, 1.3]")
        dead = (centers > 805_000) & (centers < 1_195_000)
        dead_counts = int(hist.counts[dead].sum())
        c.check(dead_counts == 0, f"{dead_counts} counts inside the closed-gate segment")

        st_cfg = load_named_scenario("storage_retrieval")
        c.check(
            st_cfg.storage_time_us() == pytest.approx(1.01, rel=1e-4),
            f"storage time {st_cfg.storage_time_us():.5f} us not 1.01",
        )
        c.check(
            st_cfg.gating.t_on_us < st_cfg.storage_time_us() < st_cfg.gating.t_off_us,
            "storage delay not inside the 0.8-1.2 us closed segment",
        )
        c.check(validate_gating(st_cfg.gating, st_cfg.storage_time_us()).ok, "gating check fails")
        st = generate(shortened(st_cfg, 2.0), jobs=2)
        echo_ps = st.meta["fiber_delay_ps"] + st.meta["storage_time_ps"]
        est = windowed_rate(
            st,
            center_ps=echo_ps,
            half_window_ps=int(round(1.45 * st_cfg.echo_fwhm_ns() * 1e3)),
            cycle_ps=int(round(st_cfg.gating.cycle_us * 1e6)),
        )
        c.check(est.rate_cps > 5 * est.stderr_cps, "no significant echo at the storage delay")
        c.note(
            f"chi2/dof={red:.3f} ({int(usable.sum())} bins), closed-gate counts={dead_counts}, "
            f"echo {est.rate_cps:.0f} cps at {st_cfg.storage_time_us():.2f} us"
        )


def test_a05_cross_correlation_recovery_and_quantum_bounds(capsys):
    with verdict(capsys, 5, "cross-correlation recovery and quantum bounds") as c:
        cfg = load_named_scenario("source_characterization")
        vals = []
        for seed in range(1, 21):
            st = generate(cfg, seed=seed)
            hist = coincidence_histogram(st, bin_ps=50, range_ps=560_000)
            vals.append(cross_g2(hist, cfg.gating, peak_shape="exponential").g2_max)
        vals = np.array(vals)
        sem = vals.std(ddof=1) / math.sqrt(vals.size)
        c.check(
            abs(vals.mean() - 130.0) <= 2 * sem,
            f"recovered g2 {vals.mean():.3f} +- {sem:.3f} not within 2 sem of 130",
        )
        c.check(cauchy_schwarz(130.0, 2.0, 2.0) == 4225.0, "classicality ratio not exactly 4225")

        rng = np.random.default_rng(41)
        heralds = np.cumsum(rng.integers(50_000, 150_000, 5000)).astype(np.int64)
        g_pairs = heralded_auto_g2(_mk_stream(heralds, heralds.copy()), window_ns=0.2).value
        c.check(g_pairs == 0.0, f"single-photon-pair auto-g2 {g_pairs} not exactly 0")
        rng = np.random.default_rng(43)
        heralds = np.cumsum(rng.integers(50_000, 150_000, 20_000)).astype(np.int64)
        t_ps = int(heralds[-1] + 100_000)
        signals = np.sort(rng.integers(0, t_ps, rng.poisson(t_ps * 5e-6))).astype(np.int64)
        g_poisson = heralded_auto_g2(_mk_stream(heralds, signals), window_ns=200.0).value
        c.check(abs(g_poisson - 1.0) <= 0.05, f"poissonian auto-g2 {g_poisson:.3f} not 1 +- 0.05")

        stored = generate(load_named_scenario("storage_retrieval"), seed=1, jobs=2)
        g_low = heralded_auto_g2(stored, window_ns=1.0).value
        c.check(g_low < 0.5, f"retrieved-field auto-g2 {g_low:.3f} not below 0.5")
        c.note(
            f"g2={vals.mean():.2f}+-{sem:.2f}, auto-g2 pairs={g_pairs}, "
            f"poisson={g_poisson:.3f}, retrieved={g_low:.3f}"
        )


def test_a06_emitted_mean_pair_number(capsys):
    with verdict(capsys, 6, "emitted mean pair number") as c:
        mu = mean_pair_number(423_000.0, 2_333_000.0, 46_000.0, 0.32)
        c.check(abs(mu - 0.0069) <= 1e-4, f"mean pair number {mu:.5f} not 0.0069 +- 1e-4")
        c.note(f"mu={mu:.5f}")


def test_a07_multimode_scaling(capsys):
    with verdict(capsys, 7, "multimode scaling") as c:
        cfg = load_named_scenario("multimode_37")
        st = generate(cfg, seed=7, jobs=4)
        sched = multimode_windows(cfg.gating, 37, 20.0)
        echo_ps = st.meta["fiber_delay_ps"] + st.meta["storage_time_ps"]
        ms = multimode_stats(
            st, sched, center_ps=echo_ps, cycle_ps=int(round(cfg.gating.cycle_us * 1e6))
        )
        c.check(ms.r_squared > 0.99, f"cumulative-rate r^2 {ms.r_squared:.5f} not > 0.99")
        ok = np.isfinite(ms.g2) & np.isfinite(ms.g2_err) & (ms.g2_err > 0)
        c.check(int(ok.sum()) == 37, f"only {int(ok.sum())}/37 modes have a finite g2")
        slope, serr = _weighted_slope(np.arange(37.0)[ok], ms.g2[ok], ms.g2_err[ok])
        c.check(abs(slope) <= 2 * serr, f"per-mode g2 slope {slope:.4f} +- {serr:.4f} not ~0")
        c.note(
            f"r^2={ms.r_squared:.5f}, mean g2={float(np.mean(ms.g2[ok])):.1f}, "
            f"g2 slope {slope:.4f}+-{serr:.4f}"
        )


def test_a08_fiber_length_sweep(capsys):
    with verdict(capsys, 8, "fiber length sweep") as c:
        cfg = load_named_scenario("fiber_extension")
        lengths = (0.0, 10.0, 25.0, 49.2)
        rows = sweep_table(
            cfg, SweepSpec("link.length_km", lengths, repeats=2), "echo_rate",
            base_seed=3, jobs=4,
        )
        kms = np.array([r[0] for r in rows])
        slope = float(np.polyfit(kms, np.log10([r[1] for r in rows]), 1)[0])
        c.check(
            abs(slope + 0.032) <= 0.10 * 0.032,
            f"log10-rate slope {slope:.5f}/km not -0.032 +- 10%",
        )

        xs, ys, es = [], [], []
        for i, km in enumerate(lengths):
            ckm = set_scenario_value(cfg, "link.length_km", km)
            for j in range(4):
                st = generate(ckm, seed=17 + 7919 * i + j, jobs=4)
                echo_ps = st.meta["fiber_delay_ps"] + st.meta["storage_time_ps"]
                h = coincidence_histogram(st, bin_ps=2_000, range_ps=80_000, center_ps=echo_ps)
                fit = cross_g2(h, peak_shape="gaussian", peak_guess_ps=echo_ps)
                xs.append(km)
                ys.append(fit.g2_max)
                es.append(fit.g2_err)
        g_slope, g_err = _weighted_slope(xs, ys, es)
        c.check(
            abs(g_slope) <= 2 * g_err,
            f"herald-echo g2 drifts with length: slope {g_slope:.4f} +- {g_err:.4f}",
        )

        deployed = dataclasses.replace(
            cfg,
            link=FiberConfig(length_km=10.6, attenuation_db_per_km=0.32, excess_loss_db=4.168),
        )
        half = int(round(1.45 * cfg.echo_fwhm_ns() * 1e3))
        cyc = int(round(cfg.gating.cycle_us * 1e6))
        ests = []
        for conf in (cfg, deployed):
            st = generate(conf, seed=303, jobs=4)
            echo_ps = st.meta["fiber_delay_ps"] + st.meta["storage_time_ps"]
            ests.append(windowed_rate(st, center_ps=echo_ps, half_window_ps=half, cycle_ps=cyc))
        ratio = ests[1].rate_cps / ests[0].rate_cps
        rerr = ratio * math.hypot(
            ests[1].stderr_cps / ests[1].rate_cps, ests[0].stderr_cps / ests[0].rate_cps
        )
        target = 10.0 ** (-7.56 / 10.0)
        c.check(
            abs(ratio - target) <= 3 * rerr,
            f"7.56 dB link ratio {ratio:.4f} +- {rerr:.4f} not {target:.4f} +- 3 sigma",
        )
        c.note(
            f"rate slope {slope:.5f}/km, g2 slope {g_slope:.4f}+-{g_err:.4f}, "
            f"deployed ratio {ratio:.4f}+-{rerr:.4f} vs {target:.4f}"
        )


def test_a09_loss_budget(capsys):
    with verdict(capsys, 9, "loss budget") as c:
        budget = loss_budget()
        c.check(
            abs(budget.total - 5.4e-5) <= 0.02 * 5.4e-5,
            f"end-to-end transmission {budget.total:.4e} not 5.4e-5 +- 2%",
        )
        c.check(
            budget.internal == pytest.approx(0.005, rel=1e-12),
            f"internal efficiency {budget.internal:.6f} not 0.5%",
        )
        c.note(f"total={budget.total:.4e}, internal={budget.internal:.4f}")


def test_a10_added_noise_budget(capsys):
    with verdict(capsys, 10, "added-noise budget") as c:
        base = load_named_scenario("fiber_extension")

        def with_dark(dark_cps, seed):
            det = dataclasses.replace(base.detectors, signal_dark_cps=dark_cps)
            run = dataclasses.replace(base.run, duration_s=1.5, seed=seed)
            return dataclasses.replace(base, detectors=det, run=run)

        # injection-recovery: add a known dark rate on the signal arm and
        # require the budget to return it without bias; baseline and injected
        # runs share a seed so everything but the dark draws is identical
        x0, bin_ps = 50_000.0, 500
        resid = []
        src_fit = src_hist = None
        for seed in range(1, 51):
            sbase = generate(with_dark(0.0, seed))
            sinj = generate(with_dark(x0, seed))
            assert sbase.meta["n_herald"] == sinj.meta["n_herald"]
            active = sbase.meta["active_s"]
            echo_ps = sbase.meta["fiber_delay_ps"] + sbase.meta["storage_time_ps"]
            if src_fit is None:
                src_hist = coincidence_histogram(sbase, bin_ps=50, range_ps=560_000)
                src_fit = cross_g2(src_hist, peak_shape="exponential", peak_guess_ps=0)
            pair = []
            for st in (sbase, sinj):
                eh = coincidence_histogram(st, bin_ps=bin_ps, range_ps=40_000, center_ps=echo_ps)
                ef = cross_g2(eh, peak_shape="gaussian", peak_guess_ps=echo_ps)
                pair.append(
                    noise_budget(
                        src_hist, eh, src_fit.g2_max, ef.g2_max,
                        eta=0.01, duration_s=active,
                        source_fit=src_fit, echo_fit=ef,
                    ).d_afc_plus_snspd
                )
            expected = sbase.meta["n_herald"] * x0 * bin_ps * 1e-12 / active
            resid.append(pair[1] - pair[0] - expected)
        resid = np.array(resid)
        sem = resid.std(ddof=1) / math.sqrt(resid.size)
        c.check(
            abs(resid.mean()) <= 3 * sem,
            f"injection recovery biased: {resid.mean():.4f} +- {sem:.4f} /bin",
        )

        # measured operating point: histograms with the bench g2 levels and
        # integration time, Poisson noise on every bin
        rng = np.random.default_rng(1)
        t_int = 10_800.0
        a_src, w_src, bw_s = 4.914 * t_int, 320.0, 50.0
        edges = -280_000.0 + bw_s * np.arange(int(2 * 280_000 / bw_s) + 1)
        bg_s = a_src * bw_s / (2.0 * w_src) / (13.9 - 1.0)
        cdf = scipy.stats.laplace(loc=0.0, scale=w_src).cdf
        mu_s = bg_s + a_src * (cdf(edges[1:]) - cdf(edges[:-1]))
        hs = Histogram(bw_s, edges[0], edges[-1], rng.poisson(mu_s))
        a_e, w_e, bw_e = 0.04914 * t_int, 8400.0 / (2.0 * math.sqrt(2.0 * math.log(2.0))), 500.0
        edges_e = 1_010_000.0 - 40_000.0 + bw_e * np.arange(int(2 * 40_000 / bw_e) + 1)
        bg_e = a_e * bw_e / (math.sqrt(2 * math.pi) * w_e) / (4.94 - 1.0)
        cdfe = scipy.stats.norm(loc=1_010_000.0, scale=w_e).cdf
        mu_e = bg_e + a_e * (cdfe(edges_e[1:]) - cdfe(edges_e[:-1]))
        he = Histogram(bw_e, edges_e[0], edges_e[-1], rng.poisson(mu_e))
        f_s = cross_g2(hs, peak_shape="exponential", peak_guess_ps=0)
        f_e = cross_g2(he, peak_shape="gaussian", peak_guess_ps=1_010_000)
        nb = noise_budget(
            hs, he, f_s.g2_max, f_e.g2_max, d_snspd=0.52e-3,
            duration_s=t_int, source_fit=f_s, echo_fit=f_e,
        )
        c.check(
            0.33e-3 < nb.d_afc_plus_snspd < 0.47e-3,
            f"memory+detector noise {nb.d_afc_plus_snspd:.3e} outside [0.33, 0.47]e-3",
        )
        c.note(
            f"injection resid {resid.mean():.4f}+-{sem:.4f}/bin over 50 seeds, "
            f"D_mem+det = {nb.d_afc_plus_snspd * 1e3:.3f}e-3"
        )


def test_a11_format_pairing_and_determinism(capsys, tmp_path):
    with verdict(capsys, 11, "file format, pairing exactness, determinism") as c:
        cfg = shortened(load_named_scenario("storage_retrieval"), 0.2, seed=31)
        st = generate(cfg)
        path = tmp_path / "run.hqtt"
        write_hqtt(st, path)
        back = read_hqtt(path)
        c.check(
            np.array_equal(back.timestamps_ps, st.timestamps_ps)
            and np.array_equal(back.channels, st.channels),
            "stream does not survive a write/read round trip",
        )
        write_hqtt(back, tmp_path / "rewrite.hqtt")
        c.check(
            path.read_bytes() == (tmp_path / "rewrite.hqtt").read_bytes(),
            "rewrite is not byte-identical",
        )
        write_metadata(path, st.meta)
        c.check(read_metadata(path) == dict(st.meta), "metadata sidecar round trip differs")

        small = TimeTagStream(st.timestamps_ps[:5000], st.channels[:5000], meta={})
        hist = coincidence_histogram(small, bin_ps=1_000, range_ps=600_000, duration_s=1.0)
        h = small.channel(CH_HERALD).astype(np.int64)
        s = small.channel(CH_SIGNAL).astype(np.int64)
        delays = (s[None, :] - h[:, None]).ravel()
        keep = delays[(delays >= -600_000) & (delays < 600_000)]
        brute = np.bincount(
            np.floor((keep + 600_000) / 1_000).astype(int), minlength=hist.counts.size
        )
        c.check(
            np.array_equal(brute, hist.counts),
            "chunked pairing differs from the all-pairs reference",
        )

        ref = generate(cfg, seed=5, jobs=1)
        same = all(
            np.array_equal(ref.timestamps_ps, generate(cfg, seed=5, jobs=j).timestamps_ps)
            and np.array_equal(ref.channels, generate(cfg, seed=5, jobs=j).channels)
            for j in (2, 3, 4)
        )
        c.check(same, "streams differ across worker counts")
        c.note(
            f"round trip bitwise on {st.timestamps_ps.size} events, all-pairs exact on "
            f"{small.timestamps_ps.size}, jobs 1-4 identical"
        )
