"""Nuclear-spin environment of the erbium site: dipolar fields, level
structures, and the combinatorial line-broadening band.

The erbium electron is treated as a polarised point dipole on the crystal
c-axis (z); each neighbouring nucleus sees the applied field plus that dipole
field and carries an axial quadrupole term fixed to the crystal axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._constants import MU0_OVER_4PI, MU_B_J_PER_T, MU_N_MHZ_PER_T
from .errors import CombinatorialOverflow, ConfigError, ZeroDistance
from .histogram import Histogram

# zircon-cell geometry (angstrom): nearest V on-axis, next-nearest derived
# from the c lattice parameter with the shell radius fixed at 3.9 A
_C_AXIS_A = 6.289
_NEAREST_V_A = 3.1
_NEXT_V_R_A = 3.9
_NEXT_V_Z_A = _C_AXIS_A / 4.0
_NEXT_V_T_A = math.sqrt(_NEXT_V_R_A**2 - _NEXT_V_Z_A**2)
_A_AXIS_A = 7.118

_ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class NuclearSpinSite:
    """One nuclear neighbour: position relative to the Er ion, spin data."""

    name: str
    position_a: tuple  # angstrom, (x, y, z) with z along c
    g_n: float
    spin: float
    quadrupole_khz: float = 0.0

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position_a)
        object.__setattr__(self, "position_a", pos)
        if len(pos) != 3:
            raise ConfigError("position must be a 3-vector", key="site.position_a")
        twoi = 2.0 * self.spin
        if self.spin <= 0 or abs(twoi - round(twoi)) > 1e-9:
            raise ConfigError(
                "spin must be a positive half-integer", key="site.spin"
            )

    def multiplicity(self):
        return int(round(2.0 * self.spin + 1.0))


def vanadium_sites():
    """Default six-site vanadium shell: two on-axis plus four next-nearest."""
    near = [
        NuclearSpinSite("V_near+", (0.0, 0.0, _NEAREST_V_A), 1.6, 3.5, 171.0),
        NuclearSpinSite("V_near-", (0.0, 0.0, -_NEAREST_V_A), 1.6, 3.5, 171.0),
    ]
    t, z = _NEXT_V_T_A, _NEXT_V_Z_A
    nxt = [
        NuclearSpinSite("V_next0", (t, 0.0, z), 1.6, 3.5, 165.0),
        NuclearSpinSite("V_next1", (-t, 0.0, z), 1.6, 3.5, 165.0),
        NuclearSpinSite("V_next2", (0.0, t, -z), 1.6, 3.5, 165.0),
        NuclearSpinSite("V_next3", (0.0, -t, -z), 1.6, 3.5, 165.0),
    ]
    return near + nxt


def yttrium_sites():
    """Representative yttrium neighbours (spin-1/2, no quadrupole)."""
    t, z = _NEXT_V_T_A, _NEXT_V_Z_A
    d = _A_AXIS_A / 2.0
    return [
        NuclearSpinSite("Y_near", (t, 0.0, z), -0.137, 0.5, 0.0),
        NuclearSpinSite("Y_next", (d, d, _C_AXIS_A / 2.0), -0.137, 0.5, 0.0),
    ]


def dipolar_field(site: NuclearSpinSite, electronic_g, applied_field_t):
    """Total field (T) at the nucleus: applied plus the Er point-dipole term.

    The electronic moment g*mu_B/2 points against the applied c-axis field
    (polarised lowest Zeeman branch), which makes the on-axis dipole field
    subtract from the applied one.
    """
    if np.isscalar(applied_field_t):
        b_app = np.array([0.0, 0.0, float(applied_field_t)])
    else:
        b_app = np.asarray(applied_field_t, dtype=float)
        if b_app.shape != (3,):
            raise ConfigError("applied field must be scalar (z) or a 3-vector")
    r_m = np.asarray(site.position_a, dtype=float) * 1e-10
    r = float(np.linalg.norm(r_m))
    if r == 0.0:
        raise ZeroDistance(f"site {site.name} sits on the Er ion")
    rhat = r_m / r
    moment = np.array([0.0, 0.0, -electronic_g * MU_B_J_PER_T / 2.0])
    b_dip = MU0_OVER_4PI * (3.0 * rhat * float(moment @ rhat) - moment) / r**3
    return b_app + b_dip


@dataclass(frozen=True)
class SpinLevelSet:
    """Eigenenergies (MHz, ascending, mean-centred) of one nuclear site."""

    site: NuclearSpinSite
    field_t: tuple
    energies_mhz: tuple

    def gaps_mhz(self):
        return np.diff(np.asarray(self.energies_mhz))

    def central_gap_mhz(self):
        """Adjacent-level spacing at the middle of the ladder (m = -1/2 <-> +1/2)."""
        gaps = self.gaps_mhz()
        return float(gaps[gaps.size // 2])


def _spin_operators(spin):
    n = int(round(2 * spin + 1))
    m = np.arange(spin, -spin - 1e-9, -1.0)
    iz = np.diag(m).astype(complex)
    ip = np.zeros((n, n))
    for k in range(1, n):
        mm = m[k]
        ip[k - 1, k] = math.sqrt(spin * (spin + 1) - mm * (mm + 1))
    ix = (ip + ip.T) / 2.0 + 0j
    iy = (ip - ip.T) / 2j
    return ix, iy, iz


def spin_levels(site: NuclearSpinSite, field_t) -> SpinLevelSet:
    """Diagonalise g_n*mu_N*(B.I) + Q*I_z^2 for the given total field (T)."""
    field = np.asarray(field_t, dtype=float)
    if field.shape != (3,):
        raise ConfigError("field must be a 3-vector in tesla")
    ix, iy, iz = _spin_operators(site.spin)
    h = site.g_n * MU_N_MHZ_PER_T * (
        field[0] * ix + field[1] * iy + field[2] * iz
    )
    h = h + (site.quadrupole_khz * 1e-3) * (iz @ iz)
    try:
        energies = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on 8x8
        raise ConfigError(f"eigensolve failed for site {site.name}: {exc}")
    energies = np.sort(np.real(energies))
    energies = energies - energies.mean()
    return SpinLevelSet(site, tuple(field.tolist()), tuple(energies.tolist()))


def transition_spacing(site: NuclearSpinSite, g_ground, g_excited, applied_field_t):
    """Optical-transition splitting (kHz) contributed by this nucleus.

    Difference of the central adjacent-level gaps computed with the
    ground-state and excited-state electronic moments.
    """
    lev_g = spin_levels(site, dipolar_field(site, g_ground, applied_field_t))
    lev_e = spin_levels(site, dipolar_field(site, g_excited, applied_field_t))
    return abs(lev_g.central_gap_mhz() - lev_e.central_gap_mhz()) * 1e3


def band_spectrum(sites, electronic_g, applied_field_t, bin_mhz=1.0) -> Histogram:
    """Histogram of all level-combination energies across the site list.

    Enumerates every combination exactly (outer sums of the mean-centred
    per-site ladders) and bins the summed energies.
    """
    if not sites:
        raise ConfigError("need at least one site")
    n_comb = 1
    for s in sites:
        n_comb *= s.multiplicity()
        if n_comb > _ENUMERATION_CAP:
            raise CombinatorialOverflow(
                f"{n_comb}+ level combinations exceed the cap {_ENUMERATION_CAP}"
            )
    total = np.zeros(1)
    for s in sites:
        lev = spin_levels(s, dipolar_field(s, electronic_g, applied_field_t))
        total = (total[:, None] + np.asarray(lev.energies_mhz)[None, :]).ravel()
    lo = math.floor(total.min() / bin_mhz) * bin_mhz
    hi = math.ceil(total.max() / bin_mhz) * bin_mhz
    if hi <= lo:
        hi = lo + bin_mhz
    hist = Histogram.from_values(
        total, bin_mhz, lo, hi, axis="frequency_mhz",
        meta={"electronic_g": electronic_g, "n_combinations": int(total.size)},
    )
    return hist


def band_span_mhz(sites, electronic_g, applied_field_t):
    """Full width (max - min) of the combination band in MHz."""
    span = 0.0
    for s in sites:
        lev = spin_levels(s, dipolar_field(s, electronic_g, applied_field_t))
        e = np.asarray(lev.energies_mhz)
        span += float(e.max() - e.min())
    return span


@dataclass(frozen=True)
class AntiholeResult:
    offset_khz: float
    k: int
    resolvable: bool


def antihole_offsets(spacing_khz, rabi_khz) -> AntiholeResult:
    """First anti-hole position outside the pump-broadened hole.

    Anti-holes appear at multiples of the level spacing; the reported offset
    is the smallest multiple k*spacing strictly above the Rabi (hole half-)
    width. Spacings below half the Rabi width are flagged unresolvable.
    """
    if spacing_khz <= 0 or rabi_khz <= 0:
        raise ConfigError("spacing and rabi width must be > 0")
    k = int(math.floor(rabi_khz / spacing_khz)) + 1
    return AntiholeResult(
        offset_khz=k * spacing_khz,
        k=k,
        resolvable=bool(spacing_khz > rabi_khz / 2.0),
    )
