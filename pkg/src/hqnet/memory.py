"""Gated atomic-frequency-comb memory model.

Covers the erbium optical transition (Zeeman tuning, electron-spin
polarisation), comb storage efficiency and its finesse optimum, echo timing,
spectral-hole persistence, and the per-photon storage branch probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._constants import H_OVER_KB_K_PER_GHZ, MU_B_GHZ_PER_T
from .errors import ConfigError, ProbabilityOverflow
from .spectral import SpectralFeature, SpectralProfile, absorbed_fraction

# squared-pi dephasing constant for a Gaussian-tooth comb
_C_DEPHASE = math.pi**2 / (2.0 * math.log(2.0))


@dataclass(frozen=True)
class AfcConfig:
    """Comb geometry: tooth spacing/width via finesse, depths, total span."""

    comb_spacing_mhz: float
    comb_bandwidth_mhz: float
    tooth_optical_depth: float
    background_depth: float = 0.0
    finesse: float = 2.0
    echo_width_constant: float = 0.84

    def __post_init__(self):
        if self.comb_spacing_mhz <= 0:
            raise ConfigError("comb spacing must be > 0", key="memory.comb_spacing_mhz")
        if self.comb_bandwidth_mhz <= 0:
            raise ConfigError(
                "comb bandwidth must be > 0", key="memory.comb_bandwidth_mhz"
            )
        if self.comb_bandwidth_mhz <= self.comb_spacing_mhz:
            raise ConfigError(
                "comb bandwidth must exceed the tooth spacing",
                key="memory.comb_bandwidth_mhz",
            )
        if self.tooth_optical_depth < 0:
            raise ConfigError(
                "tooth optical depth must be >= 0", key="memory.tooth_optical_depth"
            )
        if self.background_depth < 0:
            raise ConfigError(
                "background depth must be >= 0", key="memory.background_depth"
            )
        if self.finesse < 1:
            raise ConfigError("finesse must be >= 1", key="memory.finesse")
        if self.echo_width_constant <= 0:
            raise ConfigError(
                "echo width constant must be > 0", key="memory.echo_width_constant"
            )


@dataclass(frozen=True)
class ErTransitionConfig:
    """Optical transition of the erbium site used for storage."""

    g_ground: float = 3.54
    g_excited: float = 4.51
    inhomogeneous_fwhm_mhz: float = 131.0
    spin_splitting_ghz_per_t: float = 46.7
    zero_field_detuning_ghz: float = 6.6
    temperature_k: float = 0.150

    def __post_init__(self):
        if self.inhomogeneous_fwhm_mhz <= 0:
            raise ConfigError(
                "inhomogeneous width must be > 0",
                key="memory.transition.inhomogeneous_fwhm_mhz",
            )
        if self.temperature_k <= 0:
            raise ConfigError(
                "temperature must be > 0", key="memory.transition.temperature_k"
            )


def zeeman_shift(cfg: ErTransitionConfig, field_t):
    """Optical Zeeman shift in GHz for a c-axis field (negative = red shift).

    The shift tracks half the difference of the excited and ground electronic
    g factors times the Bohr frequency per tesla.
    """
    b = np.asarray(field_t, dtype=float)
    return -(cfg.g_excited - cfg.g_ground) / 2.0 * MU_B_GHZ_PER_T * b


def electron_polarization(splitting_ghz, temperature_k):
    """Thermal ground-state population of a two-level electron spin."""
    if temperature_k <= 0:
        raise ConfigError("temperature must be > 0")
    x = H_OVER_KB_K_PER_GHZ * np.asarray(splitting_ghz, dtype=float) / temperature_k
    return 1.0 / (1.0 + np.exp(-x))


def afc_efficiency(tooth_depth, finesse, background_depth=0.0):
    """Forward-recall efficiency of a Gaussian-tooth comb.

    (d/F)^2 exp(-d/F) exp(-pi^2/(2 ln2)/F^2) exp(-d0): comb absorption,
    re-absorption, tooth-width dephasing and background loss.
    """
    if finesse < 1:
        raise ValueError("finesse must be >= 1")
    if tooth_depth < 0 or background_depth < 0:
        raise ValueError("optical depths must be >= 0")
    deff = tooth_depth / finesse
    return (
        deff**2
        * math.exp(-deff)
        * math.exp(-_C_DEPHASE / finesse**2)
        * math.exp(-background_depth)
    )


def optimal_finesse(tooth_depth, background_depth=0.0):
    """Finesse maximising afc_efficiency at fixed depths.

    Stationarity in x = 1/F gives 2*c*x^2 + d*x - 2 = 0 with
    c = pi^2/(2 ln2); the positive root is the optimum. Returns (F*, eta*).
    """
    if tooth_depth <= 0:
        raise ValueError("tooth depth must be > 0")
    d = float(tooth_depth)
    x = (-d + math.sqrt(d * d + 16.0 * _C_DEPHASE)) / (4.0 * _C_DEPHASE)
    f_opt = 1.0 / x
    return f_opt, afc_efficiency(d, f_opt, background_depth)


@dataclass(frozen=True)
class EchoParameters:
    storage_time_us: float
    echo_fwhm_ns: float
    time_bandwidth: float


def echo_parameters(afc: AfcConfig) -> EchoParameters:
    """Echo delay and duration for a comb: delay = 1/spacing, width = k/span."""
    storage_us = 1.0 / afc.comb_spacing_mhz
    fwhm_ns = 1e3 * afc.echo_width_constant / afc.comb_bandwidth_mhz
    return EchoParameters(storage_us, fwhm_ns, storage_us * 1e3 / fwhm_ns)


@dataclass(frozen=True)
class HoleDecayModel:
    """Spectral-hole depth vs time: three exponentials plus a constant.

    Default time constants: excited-state decay (ms), a minutes-scale
    component and an hours-scale component carrying 14.5%/85.5% of the slow
    part, plus a persistent offset.
    """

    a_fast: float = 0.05
    tau_fast_s: float = 3.42e-3
    a_middle: float = 0.116
    tau_middle_s: float = 57.15
    a_slow: float = 0.684
    tau_slow_s: float = 107.45 * 60.0
    a_const: float = 0.15

    def __post_init__(self):
        for name in ("a_fast", "a_middle", "a_slow", "a_const"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0", key=f"hole.{name}")
        for name in ("tau_fast_s", "tau_middle_s", "tau_slow_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0", key=f"hole.{name}")


def hole_depth(model: HoleDecayModel, t_s):
    """Hole depth at time t after burning (arbitrary units, nonincreasing)."""
    t = np.asarray(t_s, dtype=float)
    return (
        model.a_fast * np.exp(-t / model.tau_fast_s)
        + model.a_middle * np.exp(-t / model.tau_middle_s)
        + model.a_slow * np.exp(-t / model.tau_slow_s)
        + model.a_const
    )


@dataclass(frozen=True)
class StorageOutcome:
    """Per-photon branch probabilities at the memory."""

    echo_prob: float
    transmit_prob: float
    loss_prob: float

    def __post_init__(self):
        for name in ("echo_prob", "transmit_prob", "loss_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ProbabilityOverflow(f"{name} = {p} outside [0, 1]")
        s = self.echo_prob + self.transmit_prob + self.loss_prob
        if s > 1.0 + 1e-9:
            raise ProbabilityOverflow(f"branch probabilities sum to {s:.6f} > 1")


def storage_outcome(
    photon,
    afc: AfcConfig,
    polarization_factor=0.5,
    eta_afc=None,
    comb_center_mhz=0.0,
) -> StorageOutcome:
    """Echo / transmit / loss probabilities for one incident photon.

    `photon` is a SpectralProfile, a single SpectralFeature, or directly the
    in-band fraction as a float. Photons inside the comb bandwidth are
    recalled with probability pol * eta; the unpolarised fraction and the mean
    comb transmission leak through; out-of-band photons pass; the remainder is
    absorbed without re-emission.
    """
    if not 0.0 <= polarization_factor <= 1.0:
        raise ConfigError("polarization factor must be in [0, 1]")
    if isinstance(photon, SpectralFeature):
        photon = SpectralProfile((photon,))
    if isinstance(photon, SpectralProfile):
        in_band = absorbed_fraction(photon, comb_center_mhz, afc.comb_bandwidth_mhz)
    else:
        in_band = float(photon)
    if not 0.0 <= in_band <= 1.0:
        raise ConfigError(f"in-band fraction {in_band} outside [0, 1]")
    if eta_afc is None:
        eta_afc = afc_efficiency(
            afc.tooth_optical_depth, afc.finesse, afc.background_depth
        )
    if not 0.0 <= eta_afc < 1.0:
        raise ConfigError(f"eta_afc {eta_afc} outside [0, 1)")
    t_comb = math.exp(-afc.tooth_optical_depth / afc.finesse - afc.background_depth)
    echo = in_band * polarization_factor * eta_afc
    transmit = (1.0 - in_band) + in_band * (
        (1.0 - polarization_factor) + polarization_factor * t_comb
    )
    loss = max(1.0 - echo - transmit, 0.0)
    return StorageOutcome(echo, min(transmit, 1.0), loss)
