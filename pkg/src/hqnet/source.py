"""Photon-pair source model: rates, detuning behaviour, correlation profile.

The source is characterised by measured quantities (pair and singles rates,
peak cross-correlation, correlation time) at a reference operating point;
nothing here is predicted ab initio.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SourceConfig:
    pair_rate_cps: float
    herald_singles_cps: float
    signal_singles_cps: float
    correlation_time_ns: float
    g2_cross_max: float
    delta1_mhz: float = -817.0
    delta2_mhz: float = 903.0
    power1_mw: float = 10.0
    power2_mw: float = 15.0
    spectral_slope: float = 0.3

    def __post_init__(self):
        if self.pair_rate_cps < 0:
            raise ConfigError("pair rate must be >= 0", key="source.pair_rate_cps")
        if self.herald_singles_cps < self.pair_rate_cps:
            raise ConfigError(
                "herald singles rate must be >= pair rate",
                key="source.herald_singles_cps",
            )
        if self.signal_singles_cps < self.pair_rate_cps:
            raise ConfigError(
                "signal singles rate must be >= pair rate",
                key="source.signal_singles_cps",
            )
        if self.correlation_time_ns <= 0:
            raise ConfigError(
                "correlation time must be > 0", key="source.correlation_time_ns"
            )
        if self.g2_cross_max <= 1:
            raise ConfigError("g2_cross_max must be > 1", key="source.g2_cross_max")
        if not 0.0 < self.spectral_slope < 1.0:
            raise ConfigError(
                "spectral_slope must lie in (0, 1)", key="source.spectral_slope"
            )
        if self.power1_mw <= 0 or self.power2_mw <= 0:
            raise ConfigError("pump powers must be > 0", key="source.power1_mw")


def scaled_pair_rate(cfg: SourceConfig, p1_mw, p2_mw):
    """Pair rate under bilinear pump-power scaling from the reference point."""
    if p1_mw <= 0 or p2_mw <= 0:
        raise ConfigError("pump powers must be > 0")
    return cfg.pair_rate_cps * (p1_mw / cfg.power1_mw) * (p2_mw / cfg.power2_mw)


def feature_center(cfg: SourceConfig, delta2_mhz):
    """Shift of the emitted-photon spectrum (MHz) when the second pump moves.

    The output frequency follows the pump detuning with a slope below one;
    the reference detuning maps to zero shift.
    """
    return cfg.spectral_slope * (np.asarray(delta2_mhz, dtype=float) - cfg.delta2_mhz)


def cross_correlation_profile(cfg: SourceConfig, tau_ns, tau0_ns=0.0):
    """Normalised herald-signal cross-correlation g2(tau).

    Symmetric exponential about the peak delay, floor at 1. Used both as the
    generator target and as an analytic reference for fits.
    """
    tau = np.asarray(tau_ns, dtype=float)
    return 1.0 + (cfg.g2_cross_max - 1.0) * np.exp(
        -np.abs(tau - tau0_ns) / cfg.correlation_time_ns
    )


def mean_pair_number(r_herald_cps, r_signal_cps, r_coinc_cps, tau_c_ns):
    """Mean pair number per correlation time, (r_h * r_s / r_c) * tau_c.

    The singles/coincidence ratio removes the detection efficiencies; the
    result is the emitted-pair number within one correlation time.
    """
    if r_coinc_cps == 0:
        raise ZeroDivisionError("coincidence rate is zero")
    return r_herald_cps * r_signal_cps / r_coinc_cps * (tau_c_ns * 1e-9)


@dataclass(frozen=True)
class OperatingPoint:
    """One row of a measured detuning/rate/correlation trade-off table."""

    delta2_mhz: float
    pair_rate_cps: float
    g2_max: float


def load_operating_points(path):
    """Read an operating-point table CSV (delta2_mhz, pair_rate_cps, g2_max)."""
    points = []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        required = {"delta2_mhz", "pair_rate_cps", "g2_max"}
        if r.fieldnames is None or not required.issubset(r.fieldnames):
            raise ConfigError(
                f"operating-point table needs columns {sorted(required)}, "
                f"got {r.fieldnames}"
            )
        for row in r:
            points.append(
                OperatingPoint(
                    float(row["delta2_mhz"]),
                    float(row["pair_rate_cps"]),
                    float(row["g2_max"]),
                )
            )
    if not points:
        raise ConfigError("operating-point table is empty")
    return sorted(points, key=lambda p: p.delta2_mhz)


def apply_operating_point(cfg: SourceConfig, point: OperatingPoint) -> SourceConfig:
    """Source config moved to a tabulated operating point.

    The pair rate and correlation peak come straight from the table; the two
    singles rates are rescaled by a common factor chosen so the accidental
    level implied by the tabulated peak is reproduced,
    g2 - 1 = r_pair / (2 tau_c r_herald r_signal).  Detection efficiencies
    cancel in that ratio, so matching the generated rates is enough.
    """
    if point.g2_max <= 1:
        raise ConfigError("tabulated g2_max must be > 1")
    if cfg.herald_singles_cps <= 0 or cfg.signal_singles_cps <= 0:
        raise ConfigError("reference singles rates must be > 0 to rescale")
    tau_s = cfg.correlation_time_ns * 1e-9
    product = point.pair_rate_cps / (2.0 * tau_s * (point.g2_max - 1.0))
    scale = np.sqrt(product / (cfg.herald_singles_cps * cfg.signal_singles_cps))
    return SourceConfig(
        pair_rate_cps=point.pair_rate_cps,
        herald_singles_cps=cfg.herald_singles_cps * scale,
        signal_singles_cps=cfg.signal_singles_cps * scale,
        correlation_time_ns=cfg.correlation_time_ns,
        g2_cross_max=point.g2_max,
        delta1_mhz=cfg.delta1_mhz,
        delta2_mhz=point.delta2_mhz,
        power1_mw=cfg.power1_mw,
        power2_mw=cfg.power2_mw,
        spectral_slope=cfg.spectral_slope,
    )
