"""Fiber channel and temporal gating between the source and memory nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._constants import SPEED_OF_LIGHT_M_PER_S
from .errors import ConfigError


@dataclass(frozen=True)
class FiberConfig:
    length_km: float = 0.0
    attenuation_db_per_km: float = 0.32
    excess_loss_db: float = 0.0
    group_index: float = 1.468

    def __post_init__(self):
        if self.length_km < 0:
            raise ConfigError("length must be >= 0", key="link.length_km")
        if self.attenuation_db_per_km < 0:
            raise ConfigError(
                "attenuation must be >= 0", key="link.attenuation_db_per_km"
            )
        if self.excess_loss_db < 0:
            raise ConfigError("excess loss must be >= 0", key="link.excess_loss_db")
        if self.group_index < 1:
            raise ConfigError("group index must be >= 1", key="link.group_index")

    def total_loss_db(self):
        return self.length_km * self.attenuation_db_per_km + self.excess_loss_db


def fiber_transmission(cfg: FiberConfig):
    """Power transmission 10^(-loss_dB/10)."""
    return 10.0 ** (-cfg.total_loss_db() / 10.0)


def fiber_delay_s(cfg: FiberConfig):
    """Group delay of the fiber span in seconds."""
    return cfg.length_km * 1e3 * cfg.group_index / SPEED_OF_LIGHT_M_PER_S


@dataclass(frozen=True)
class GatingConfig:
    """Alternating transmission gate: open t_on, closed t_off, offset tau_d."""

    t_on_us: float = 0.8
    t_off_us: float = 1.2
    tau_d_us: float = 0.0

    def __post_init__(self):
        if self.t_on_us <= 0:
            raise ConfigError("t_on must be > 0", key="gating.t_on_us")
        if self.t_off_us <= 0:
            raise ConfigError("t_off must be > 0", key="gating.t_off_us")
        if self.tau_d_us < 0:
            raise ConfigError("tau_d must be >= 0", key="gating.tau_d_us")

    @property
    def cycle_us(self):
        return self.t_on_us + self.t_off_us

    @property
    def gate_duty(self):
        return self.t_on_us / self.cycle_us


@dataclass(frozen=True)
class GatingReport:
    ok: bool
    violations: tuple = field(default=())


def validate_gating(gating: GatingConfig, storage_time_us) -> GatingReport:
    """Check the gate timing against the memory recall delay.

    The retrieved photon must reappear while the gate is closed, which
    requires t_on < storage time < t_off.
    """
    violations = []
    if not storage_time_us > gating.t_on_us:
        violations.append(
            f"storage time {storage_time_us:.4g} us must exceed t_on "
            f"{gating.t_on_us:.4g} us"
        )
    if not storage_time_us < gating.t_off_us:
        violations.append(
            f"storage time {storage_time_us:.4g} us must be below t_off "
            f"{gating.t_off_us:.4g} us"
        )
    return GatingReport(ok=not violations, violations=tuple(violations))


def background_profile(gating: GatingConfig, tau_us, amplitude=1.0):
    """Accidental-coincidence background shape under two synchronised gates.

    Cyclic cross-correlation of two open windows of width t_on offset by
    tau_d: triangular around tau_d (peak amplitude*t_on), exactly zero over
    [tau_d + t_on, tau_d + t_off], rising again toward the cycle end.
    Integral over one cycle is amplitude * t_on^2.
    """
    tau = np.asarray(tau_us, dtype=float)
    ton, cyc = gating.t_on_us, gating.cycle_us
    u = np.mod(tau - gating.tau_d_us, cyc)
    out = np.clip(ton - u, 0.0, None) + np.clip(u - (cyc - ton), 0.0, None)
    return amplitude * out
