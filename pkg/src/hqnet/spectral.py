"""Spectral line-shape models: photon emission profiles and absorber filtering.

Frequencies are detunings in MHz from a common reference; densities are
per-MHz and integrate to the feature weight (fraction of total emission).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._constants import FWHM_SIGMA
from .errors import ConfigError, GridTooCoarse

_SHAPES = ("gaussian", "lorentzian")

# auto-grid construction: span each feature by +-8 fwhm, sample the
# narrowest feature with at least 20 points per fwhm
_SPAN_FWHM = 8.0
_POINTS_PER_FWHM = 20.0


@dataclass(frozen=True)
class SpectralFeature:
    """Single emission/absorption feature."""

    center_mhz: float
    fwhm_mhz: float
    weight: float = 1.0
    shape: str = "gaussian"

    def __post_init__(self):
        if self.fwhm_mhz <= 0:
            raise ConfigError("fwhm_mhz must be > 0", key="spectrum.fwhm_mhz")
        if self.weight < 0:
            raise ConfigError("weight must be >= 0", key="spectrum.weight")
        if self.shape not in _SHAPES:
            raise ConfigError(f"shape must be one of {_SHAPES}", key="spectrum.shape")

    def density(self, nu_mhz):
        """Per-MHz density at detuning nu (scalar or array)."""
        nu = np.asarray(nu_mhz, dtype=float)
        d = nu - self.center_mhz
        if self.shape == "gaussian":
            sigma = self.fwhm_mhz / FWHM_SIGMA
            out = np.exp(-0.5 * (d / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))
        else:
            hw = self.fwhm_mhz / 2.0
            out = (hw / np.pi) / (d * d + hw * hw)
        return self.weight * out

    def peak_density(self):
        """Density at the feature center."""
        return float(self.density(self.center_mhz))


@dataclass(frozen=True)
class SpectralProfile:
    """Weighted mixture of features; total weight must not exceed 1."""

    features: tuple

    def __post_init__(self):
        feats = tuple(self.features)
        if not feats:
            raise ConfigError("profile needs at least one feature", key="spectrum")
        object.__setattr__(self, "features", feats)
        if self.total_weight() > 1.0 + 1e-9:
            raise ConfigError(
                f"feature weights sum to {self.total_weight():.6f} > 1", key="spectrum"
            )

    @classmethod
    def single(cls, center_mhz, fwhm_mhz, weight=1.0, shape="gaussian"):
        return cls((SpectralFeature(center_mhz, fwhm_mhz, weight, shape),))

    def total_weight(self):
        return float(sum(f.weight for f in self.features))

    def density(self, nu_mhz):
        nu = np.asarray(nu_mhz, dtype=float)
        out = np.zeros_like(nu)
        for f in self.features:
            out += f.density(nu)
        return out

    def shifted(self, delta_mhz):
        """Profile with every feature center moved by delta_mhz."""
        return SpectralProfile(
            tuple(
                SpectralFeature(f.center_mhz + delta_mhz, f.fwhm_mhz, f.weight, f.shape)
                for f in self.features
            )
        )

    def min_fwhm(self):
        return min(f.fwhm_mhz for f in self.features)

    def span(self):
        """(lo, hi) covering every feature +- 8 fwhm."""
        lo = min(f.center_mhz - _SPAN_FWHM * f.fwhm_mhz for f in self.features)
        hi = max(f.center_mhz + _SPAN_FWHM * f.fwhm_mhz for f in self.features)
        return lo, hi


def density(profile: SpectralProfile, nu_mhz):
    """Module-level alias for profile.density."""
    return profile.density(nu_mhz)


def auto_grid(*profiles: SpectralProfile) -> np.ndarray:
    """Uniform grid covering all profiles, fine enough for the narrowest feature."""
    lo = min(p.span()[0] for p in profiles)
    hi = max(p.span()[1] for p in profiles)
    step = min(p.min_fwhm() for p in profiles) / _POINTS_PER_FWHM
    n = int(np.ceil((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def _check_grid(grid, *profiles):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ConfigError("grid must be a 1-d array with >= 2 points")
    step = float(np.max(np.diff(grid)))
    limit = min(p.min_fwhm() for p in profiles) / _POINTS_PER_FWHM
    if step > limit * (1 + 1e-9):
        raise GridTooCoarse(
            f"grid spacing {step:.4g} MHz exceeds {limit:.4g} MHz "
            "(fwhm/20 of the narrowest feature)"
        )
    return grid


@dataclass(frozen=True)
class AbsorptionProfile:
    """Absorber described by a line profile scaled to a peak optical depth.

    depth(nu) follows the profile shape normalised to its maximum, so the
    deepest point has optical depth exactly `peak_optical_depth`.
    """

    profile: SpectralProfile
    peak_optical_depth: float

    def __post_init__(self):
        if self.peak_optical_depth < 0:
            raise ConfigError("peak_optical_depth must be >= 0", key="absorber.depth")

    def _max_density(self):
        # dense sampling plus the feature centers catches the true maximum
        grid = auto_grid(self.profile)
        cand = np.concatenate(
            [grid, [f.center_mhz for f in self.profile.features]]
        )
        return float(np.max(self.profile.density(cand)))

    def depth(self, nu_mhz):
        peak = self._max_density()
        return self.peak_optical_depth * self.profile.density(nu_mhz) / peak

    def transmission(self, nu_mhz):
        """exp(-depth) at each detuning."""
        return np.exp(-self.depth(nu_mhz))


@dataclass
class SampledSpectrum:
    """Density sampled on a frequency grid, e.g. the output of notch_filter."""

    nu_mhz: np.ndarray
    density: np.ndarray
    transmitted_fraction: float = 1.0
    meta: dict = field(default_factory=dict)

    def integral(self):
        return float(np.trapezoid(self.density, self.nu_mhz))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["nu_mhz", "density_per_mhz"])
            for nu, de in zip(self.nu_mhz, self.density):
                w.writerow([f"{nu:.6f}", f"{de:.9e}"])

    @classmethod
    def from_csv(cls, path):
        nu, de = [], []
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header[:2] != ["nu_mhz", "density_per_mhz"]:
                raise ConfigError(f"unexpected spectrum CSV header: {header}")
            for row in r:
                nu.append(float(row[0]))
                de.append(float(row[1]))
        return cls(np.asarray(nu), np.asarray(de))


def notch_filter(photon: SpectralProfile, absorber: AbsorptionProfile, grid=None):
    """Photon profile seen through the absorber: density * exp(-depth).

    Returns a SampledSpectrum whose transmitted_fraction is the surviving
    fraction of the photon's weight.
    """
    if grid is None:
        grid = auto_grid(photon, absorber.profile)
    else:
        grid = _check_grid(grid, photon, absorber.profile)
    dens_in = photon.density(grid)
    dens_out = dens_in * absorber.transmission(grid)
    total_in = np.trapezoid(dens_in, grid)
    total_out = np.trapezoid(dens_out, grid)
    frac = float(total_out / total_in) if total_in > 0 else 1.0
    return SampledSpectrum(grid, dens_out, transmitted_fraction=frac)


def absorbed_fraction(photon: SpectralProfile, window_center_mhz, window_width_mhz, grid=None):
    """Fraction of the photon's weight inside a frequency window (trapezoid rule)."""
    if window_width_mhz <= 0:
        raise ConfigError("window width must be > 0")
    lo = window_center_mhz - window_width_mhz / 2.0
    hi = window_center_mhz + window_width_mhz / 2.0
    if grid is None:
        step = photon.min_fwhm() / _POINTS_PER_FWHM
        n = max(int(np.ceil((hi - lo) / step)) + 1, 41)
        grid = np.linspace(lo, hi, n)
    else:
        grid = _check_grid(grid, photon)
        grid = grid[(grid >= lo) & (grid <= hi)]
        if grid.size < 2:
            raise ConfigError("grid has fewer than 2 points inside the window")
    inside = np.trapezoid(photon.density(grid), grid)
    return float(inside / photon.total_weight())
