"""Command-line entry point.

Subcommands: simulate (scenario -> HQTT stream), analyze (stream -> JSON/CSV
results), sweep (parameter scan with per-point simulate+analyze), design-afc
(comb design report), levels (neighbouring-nucleus level structure), match
(source spectrum vs memory acceptance band). Exit codes: 0 ok, 2 config
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import os
import secrets
import sys
import tempfile

import numpy as np

from . import superhyperfine
from .analysis import cross_g2, coincidence_histogram, heralded_auto_g2, windowed_rate
from .errors import ConfigError, HqnetError
from .link import FiberConfig, GatingConfig, fiber_delay_s
from .memory import AfcConfig, EchoParameters, echo_parameters, optimal_finesse
from .scenario import (
    TOOL_VERSION,
    ScenarioConfig,
    load_scenario,
    scenario_hash,
)
from .simulate import generate
from .source import apply_operating_point, load_operating_points
from .spectral import SpectralProfile, absorbed_fraction
from .timetags import read_hqtt, read_metadata, write_hqtt, write_metadata

_DIRECT_RANGE_PS = 560_000
_DIRECT_BIN_PS = 50
_ECHO_RANGE_PS = 80_000
_ECHO_BIN_PS = 2_000
METRICS = ("echo_rate", "g2_he", "g2_hs", "efficiency")


def _jobs(args):
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("HQNET_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HQNET_JOBS={env!r} is not an integer")
    return 1


def _pick_seed(args):
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"no --seed given; drew {seed} from entropy", file=sys.stderr)
    return seed


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def set_scenario_value(cfg, dotted_path, value):
    """Return a copy of cfg with one dotted field replaced (re-validated)."""
    head, _, rest = dotted_path.partition(".")
    if not hasattr(cfg, head):
        raise ConfigError(f"no such field '{head}' on {type(cfg).__name__}", key=dotted_path)
    if rest:
        sub = set_scenario_value(getattr(cfg, head), rest, value)
        return dataclasses.replace(cfg, **{head: sub})
    return dataclasses.replace(cfg, **{head: value})


def _resolve_path(cfg, dotted_path):
    obj = cfg
    for part in dotted_path.split("."):
        if not hasattr(obj, part):
            raise ConfigError(f"parameter path does not resolve at '{part}'", key=dotted_path)
        obj = getattr(obj, part)
    return obj


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """One scanned scenario field, the values to visit, and seeds per point."""

    param: str
    values: tuple
    repeats: int = 1

    def validate(self, cfg: ScenarioConfig):
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        _resolve_path(cfg, self.param)


# ---------------------------------------------------------------------------
# stream geometry + metrics shared by analyze and sweep


def _geometry(cfg: ScenarioConfig):
    cycle_ps = int(round(cfg.gating.cycle_us * 1e6))
    direct_ps = int(round(fiber_delay_s(cfg.link) * 1e12))
    echo_ps = direct_ps + int(round(cfg.storage_time_us() * 1e6))
    half_echo_ps = int(round(1.45 * cfg.echo_fwhm_ns() * 1e3))
    return cycle_ps, direct_ps, echo_ps, half_echo_ps


def _shifted_gating(cfg: ScenarioConfig, direct_ps):
    """Gating config whose offset includes the fiber delay (mod one cycle)."""
    cyc = cfg.gating.cycle_us
    tau = (cfg.gating.tau_d_us + direct_ps * 1e-6) % cyc
    return GatingConfig(cfg.gating.t_on_us, cfg.gating.t_off_us, tau)


def _active_duration_s(cfg: ScenarioConfig):
    cycle_s = cfg.gating.cycle_us * 1e-6
    n = max(1, int(round(cfg.run.duration_s * cfg.run.duty / cycle_s)))
    return n * cycle_s


def _metric_value(stream, cfg: ScenarioConfig, metric):
    cycle_ps, direct_ps, echo_ps, half_echo = _geometry(cfg)
    duration = stream.meta.get("active_s") or _active_duration_s(cfg)
    if metric == "echo_rate":
        est = windowed_rate(
            stream, center_ps=echo_ps, half_window_ps=half_echo,
            cycle_ps=cycle_ps, duration_s=duration,
        )
        return est.rate_cps, est.stderr_cps
    if metric == "g2_he":
        hist = coincidence_histogram(
            stream, bin_ps=_ECHO_BIN_PS, range_ps=_ECHO_RANGE_PS,
            center_ps=echo_ps, duration_s=duration,
        )
        fit = cross_g2(hist, peak_shape="gaussian", peak_guess_ps=echo_ps)
        return fit.g2_max, fit.g2_err
    if metric == "g2_hs":
        hist = coincidence_histogram(
            stream, bin_ps=_DIRECT_BIN_PS, range_ps=_DIRECT_RANGE_PS,
            center_ps=direct_ps, duration_s=duration,
        )
        fit = cross_g2(
            hist, _shifted_gating(cfg, direct_ps),
            peak_shape="exponential", peak_guess_ps=direct_ps,
        )
        return fit.g2_max, fit.g2_err
    if metric == "efficiency":
        est = windowed_rate(
            stream, center_ps=echo_ps, half_window_ps=half_echo,
            cycle_ps=cycle_ps, duration_s=duration,
        )
        n_heralds = int(stream.meta.get("n_herald", len(stream.channel(0))))
        if n_heralds == 0:
            return 0.0, 0.0
        herald_rate = n_heralds / duration
        return est.rate_cps / herald_rate, est.stderr_cps / herald_rate
    raise ConfigError(f"unknown metric '{metric}'; choose one of {', '.join(METRICS)}")


def sweep_table(cfg, spec: SweepSpec, metric, base_seed=0, jobs=1, operating_points=None):
    """Run the sweep; returns rows of (value, mean, stderr, n)."""
    if metric not in METRICS:
        raise ConfigError(f"unknown metric '{metric}'; choose one of {', '.join(METRICS)}")
    spec.validate(cfg)
    by_delta = None
    if operating_points is not None:
        by_delta = {p.delta2_mhz: p for p in operating_points}

    def configure(value):
        c = set_scenario_value(cfg, spec.param, value)
        if by_delta is not None and spec.param == "source.delta2_mhz":
            if value not in by_delta:
                raise ConfigError(f"no operating point tabulated at {value} MHz")
            c = dataclasses.replace(c, source=apply_operating_point(cfg.source, by_delta[value]))
        c.validate_for_simulation()
        return c

    def one(iv, jr):
        c = configure(spec.values[iv])
        seed = base_seed + 7919 * iv + jr
        stream = generate(c, seed=seed, jobs=1)
        return _metric_value(stream, c, metric)

    tasks = [(iv, jr) for iv in range(len(spec.values)) for jr in range(spec.repeats)]
    results = {}

    def guarded(task):
        iv, jr = task
        try:
            return task, one(iv, jr)
        except Exception as exc:
            raise RuntimeError(
                f"sweep point {iv} (value {spec.values[iv]!r}, repeat {jr}) failed: {exc}"
            ) from exc

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            for task, res in pool.map(guarded, tasks):
                results[task] = res
    else:
        for task in tasks:
            task, res = guarded(task)
            results[task] = res

    rows = []
    for iv, value in enumerate(spec.values):
        vals = [results[(iv, jr)][0] for jr in range(spec.repeats)]
        if spec.repeats > 1:
            mean = float(np.mean(vals))
            err = float(np.std(vals, ddof=1) / np.sqrt(spec.repeats))
        else:
            mean, err = vals[0], results[(iv, 0)][1]
        rows.append((value, mean, err, spec.repeats))
    return rows


# ---------------------------------------------------------------------------
# subcommands


def run_simulate(args):
    cfg = load_scenario(args.scenario)
    if args.duration is not None:
        cfg = set_scenario_value(cfg, "run.duration_s", args.duration)
    cfg.validate_for_simulation()
    seed = _pick_seed(args)
    stream = generate(cfg, seed=seed, jobs=_jobs(args))
    write_hqtt(stream, args.out)
    meta = dict(stream.meta)
    meta["tool_version"] = TOOL_VERSION
    write_metadata(args.out, meta)
    print(f"wrote {len(stream)} events to {args.out} (seed {seed})")
    return 0


def _fit_to_dict(fit):
    return {
        "g2_max": fit.g2_max,
        "g2_err": fit.g2_err,
        "peak_delay_ps": fit.peak_delay_ps,
        "peak_fwhm_ps": fit.peak_fwhm_ps,
        "peak_counts": fit.peak_counts,
        "background_per_bin": fit.background_per_bin,
        "fit_kind": fit.fit_kind,
        "peak_shape": fit.peak_shape,
        "lower_bound": fit.lower_bound,
    }


def run_analyze(args):
    cfg = load_scenario(args.scenario)
    stream = read_hqtt(args.input)
    try:
        meta = read_metadata(args.input)
    except (OSError, ValueError):
        meta = {}
        print(f"warning: no metadata sidecar for {args.input}", file=sys.stderr)
    want = scenario_hash(cfg)
    got = meta.get("scenario_hash")
    if got is not None and got != want and not args.force:
        print(
            f"scenario hash mismatch: stream was produced by {got[:12]}..., "
            f"given scenario is {want[:12]}...; pass --force to analyze anyway",
            file=sys.stderr,
        )
        return 2

    cycle_ps, direct_ps, echo_ps, half_echo = _geometry(cfg)
    duration = meta.get("active_s") or _active_duration_s(cfg)
    out = {
        "tool_version": TOOL_VERSION,
        "scenario_hash": want,
        "seed": meta.get("seed"),
        "events": len(stream),
        "active_s": duration,
        "herald_rate_cps": stream.channel(0).size / duration,
        "signal_rate_cps": stream.channel(1).size / duration,
        "time_bandwidth_product": cfg.storage_time_us() * 1e3 / cfg.echo_fwhm_ns(),
    }
    stream.meta.setdefault("active_s", duration)

    hists = {}
    for name, center, bin_ps, range_ps, shape, gated in (
        ("direct", direct_ps, _DIRECT_BIN_PS, _DIRECT_RANGE_PS, "exponential", True),
        ("echo", echo_ps, _ECHO_BIN_PS, _ECHO_RANGE_PS, "gaussian", False),
    ):
        try:
            hist = coincidence_histogram(
                stream, bin_ps=bin_ps, range_ps=range_ps,
                center_ps=center, duration_s=duration,
            )
            hists[name] = hist
            gating = _shifted_gating(cfg, direct_ps) if gated else None
            fit = cross_g2(hist, gating, peak_shape=shape, peak_guess_ps=center)
            out[name] = _fit_to_dict(fit)
        except HqnetError as exc:
            out[name] = {"error": str(exc)}

    est = windowed_rate(
        stream, center_ps=echo_ps, half_window_ps=half_echo,
        cycle_ps=cycle_ps, duration_s=duration,
    )
    out["echo_rate_cps"] = {"value": est.rate_cps, "stderr": est.stderr_cps}
    try:
        auto = heralded_auto_g2(stream)
        out["heralded_auto_g2"] = {"value": auto.value, "stderr": auto.stderr}
    except HqnetError as exc:
        out["heralded_auto_g2"] = {"error": str(exc)}

    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        _atomic_write(args.out, text + "\n")
    else:
        print(text)
    if args.csv_prefix:
        for name, hist in hists.items():
            hist.to_csv(f"{args.csv_prefix}_{name}.csv")
    return 0


def run_sweep(args):
    cfg = load_scenario(args.scenario)
    values = tuple(float(v) for v in args.values.split(","))
    spec = SweepSpec(args.param, values, args.repeats)
    points = load_operating_points(args.operating_table) if args.operating_table else None
    seed = _pick_seed(args)
    rows = sweep_table(
        cfg, spec, args.metric, base_seed=seed, jobs=_jobs(args),
        operating_points=points,
    )
    lines = ["value,mean,stderr,n"]
    for value, mean, err, n in rows:
        lines.append(f"{value:.10g},{mean:.10g},{err:.10g},{n}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def run_design_afc(args):
    f_star, eta_star = optimal_finesse(args.tooth_depth, args.background_depth)
    spacings = [float(s) for s in args.spacings.split(",")]
    rows = []
    for spacing in spacings:
        afc = AfcConfig(
            comb_spacing_mhz=spacing,
            comb_bandwidth_mhz=args.bandwidth,
            tooth_optical_depth=args.tooth_depth,
            background_depth=args.background_depth,
            finesse=f_star,
        )
        ep: EchoParameters = echo_parameters(afc)
        rows.append(
            {
                "comb_spacing_mhz": spacing,
                "storage_time_us": ep.storage_time_us,
                "echo_fwhm_ns": ep.echo_fwhm_ns,
                "time_bandwidth_product": ep.time_bandwidth,
            }
        )
    profile = SpectralProfile.single(0.0, args.input_fwhm)
    in_band = absorbed_fraction(profile, 0.0, args.bandwidth)
    report = {
        "optimal_finesse": f_star,
        "optimal_efficiency": eta_star,
        "input_fwhm_mhz": args.input_fwhm,
        "in_band_fraction": in_band,
        "table": rows,
        "warnings": [],
    }
    if args.input_fwhm > args.bandwidth:
        report["warnings"].append(
            "input spectral width exceeds the comb bandwidth; the out-of-band "
            "fraction cannot be stored"
        )
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        _atomic_write(args.out, text + "\n")
    else:
        print(text)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def run_levels(args):
    g_ground, g_excited = args.g_ground, args.g_excited
    sites = superhyperfine.vanadium_sites()
    if args.include_yttrium:
        sites = sites + superhyperfine.yttrium_sites()
    lines = []
    for site in sites:
        field = superhyperfine.dipolar_field(site, g_ground, args.field)
        levels = superhyperfine.spin_levels(site, field)
        opt_khz = superhyperfine.transition_spacing(site, g_ground, g_excited, args.field)
        lines.append(
            f"{site.name}: central gap {levels.central_gap_mhz():.4f} MHz, "
            f"optical spacing {opt_khz:.2f} kHz"
        )
        anti = superhyperfine.antihole_offsets(opt_khz, args.rabi_khz)
        lines.append(
            f"  first anti-hole at {anti.offset_khz:.2f} kHz (k={anti.k}, "
            f"{'resolvable' if anti.resolvable else 'unresolvable'} at "
            f"{args.rabi_khz:.0f} kHz hole width)"
        )
    band = superhyperfine.band_spectrum(
        superhyperfine.vanadium_sites(), g_ground, args.field, bin_mhz=args.bin_mhz
    )
    span = superhyperfine.band_span_mhz(
        superhyperfine.vanadium_sites(), g_ground, args.field
    )
    lines.append(f"vanadium combination band span: {span:.1f} MHz")
    print("\n".join(lines))
    if args.out:
        band.to_csv(args.out)
        print(f"wrote band spectrum to {args.out}")
    return 0


def run_match(args):
    cfg = load_scenario(args.scenario)
    if args.delta2:
        deltas = [float(v) for v in args.delta2.split(",")]
    else:
        base = cfg.source.delta2_mhz
        deltas = list(np.linspace(base - 300.0, base + 300.0, 13))
    from .source import feature_center

    rows = []
    for d2 in deltas:
        shift = float(feature_center(cfg.source, d2))
        shifted = cfg.spectrum.shifted(shift)
        frac = absorbed_fraction(
            shifted, cfg.memory.comb_center_mhz, cfg.memory.afc.comb_bandwidth_mhz
        )
        rows.append((d2, shift, frac))
    lines = ["delta2_mhz,center_shift_mhz,in_band_fraction"]
    for d2, shift, frac in rows:
        lines.append(f"{d2:.10g},{shift:.10g},{frac:.10g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="hqnet",
        description="Simulation and analysis toolkit for a gated photon-pair "
        "+ spectral-hole memory link.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate a time-tag stream from a scenario")
    ps.add_argument("--scenario", required=True)
    ps.add_argument("--out", required=True)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--duration", type=float, default=None, help="override run.duration_s")
    ps.add_argument("--jobs", type=int, default=None)
    ps.set_defaults(func=run_simulate)

    pa = sub.add_parser("analyze", help="correlations and rates from an HQTT stream")
    pa.add_argument("--in", dest="input", required=True)
    pa.add_argument("--scenario", required=True)
    pa.add_argument("--out", default=None, help="JSON output path (default stdout)")
    pa.add_argument("--csv-prefix", default=None, help="write histograms as CSV")
    pa.add_argument("--force", action="store_true", help="ignore scenario hash mismatch")
    pa.set_defaults(func=run_analyze)

    pw = sub.add_parser("sweep", help="scan one scenario parameter")
    pw.add_argument("--scenario", required=True)
    pw.add_argument("--param", required=True, help="dotted path, e.g. link.length_km")
    pw.add_argument("--values", required=True, help="comma-separated values")
    pw.add_argument("--metric", default="echo_rate", choices=METRICS)
    pw.add_argument("--repeats", type=int, default=1)
    pw.add_argument("--seed", type=int, default=None)
    pw.add_argument("--jobs", type=int, default=None)
    pw.add_argument("--operating-table", default=None,
                    help="CSV of tabulated operating points for source.delta2_mhz")
    pw.add_argument("--out", default=None)
    pw.set_defaults(func=run_sweep)

    pd = sub.add_parser("design-afc", help="comb design figures for given depths")
    pd.add_argument("--tooth-depth", type=float, required=True)
    pd.add_argument("--background-depth", type=float, default=0.0)
    pd.add_argument("--bandwidth", type=float, default=100.0, help="comb bandwidth (MHz)")
    pd.add_argument("--input-fwhm", type=float, default=43.0, help="input photon fwhm (MHz)")
    pd.add_argument("--spacings", default="0.5,0.990099,2.0,5.0,10.0",
                    help="comma-separated comb spacings (MHz)")
    pd.add_argument("--out", default=None)
    pd.set_defaults(func=run_design_afc)

    pl = sub.add_parser("levels", help="neighbouring-nucleus level structure")
    pl.add_argument("--field", type=float, default=1.0, help="applied field (T)")
    pl.add_argument("--g-ground", type=float, default=3.54)
    pl.add_argument("--g-excited", type=float, default=4.51)
    pl.add_argument("--rabi-khz", type=float, default=150.0)
    pl.add_argument("--bin-mhz", type=float, default=1.0)
    pl.add_argument("--include-yttrium", action="store_true")
    pl.add_argument("--out", default=None, help="CSV for the combination band")
    pl.set_defaults(func=run_levels)

    pm = sub.add_parser("match", help="source spectrum vs memory acceptance band")
    pm.add_argument("--scenario", required=True)
    pm.add_argument("--delta2", default=None, help="comma-separated pump detunings (MHz)")
    pm.add_argument("--out", default=None)
    pm.set_defaults(func=run_match)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HqnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
