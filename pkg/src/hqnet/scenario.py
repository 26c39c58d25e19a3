"""Scenario files: one TOML document describing a complete link configuration.

Sections: [source] (with [[source.spectrum]] feature tables), [memory] (comb,
transition, polarisation), [link], [gating], [detectors], [run]. Loading is
strict — unknown or missing keys raise ConfigError with the dotted key path —
and load -> dump -> load is the identity on every field.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError
from .link import FiberConfig, GatingConfig, validate_gating
from .memory import (
    AfcConfig,
    ErTransitionConfig,
    StorageOutcome,
    echo_parameters,
    storage_outcome,
)
from .source import SourceConfig
from .spectral import SpectralFeature, SpectralProfile

TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class MemoryConfig:
    afc: AfcConfig
    transition: ErTransitionConfig
    polarization_factor: float = 0.5
    field_t: float = 1.0
    comb_center_mhz: float = 0.0
    eta_afc: float | None = None  # measured override; None -> comb model value


@dataclass(frozen=True)
class DetectorConfig:
    herald_efficiency: float = 1.0
    signal_efficiency: float = 1.0
    herald_dark_cps: float = 0.0
    signal_dark_cps: float = 0.0

    def __post_init__(self):
        for name in ("herald_efficiency", "signal_efficiency"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError("efficiency must be in [0, 1]", key=f"detectors.{name}")
        for name in ("herald_dark_cps", "signal_dark_cps"):
            if getattr(self, name) < 0:
                raise ConfigError("dark rate must be >= 0", key=f"detectors.{name}")


@dataclass(frozen=True)
class RunConfig:
    duration_s: float = 10.0
    seed: int = 0
    duty: float = 0.476
    gate_duty: float | None = None  # defaults to duty * t_on/(t_on + t_off)

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("duration must be > 0", key="run.duration_s")
        if not 0.0 < self.duty <= 1.0:
            raise ConfigError("duty must be in (0, 1]", key="run.duty")
        if self.gate_duty is not None and not 0.0 < self.gate_duty <= 1.0:
            raise ConfigError("gate_duty must be in (0, 1]", key="run.gate_duty")


@dataclass(frozen=True)
class ScenarioConfig:
    source: SourceConfig
    spectrum: SpectralProfile
    memory: MemoryConfig
    link: FiberConfig
    gating: GatingConfig
    detectors: DetectorConfig
    run: RunConfig

    # ---- derived quantities -------------------------------------------------
    def storage_time_us(self):
        return echo_parameters(self.memory.afc).storage_time_us

    def echo_fwhm_ns(self):
        return echo_parameters(self.memory.afc).echo_fwhm_ns

    def storage(self) -> StorageOutcome:
        return storage_outcome(
            self.spectrum,
            self.memory.afc,
            polarization_factor=self.memory.polarization_factor,
            eta_afc=self.memory.eta_afc,
            comb_center_mhz=self.memory.comb_center_mhz,
        )

    def gate_duty(self):
        if self.run.gate_duty is not None:
            return self.run.gate_duty
        return self.run.duty * self.gating.gate_duty

    def validate_for_simulation(self):
        report = validate_gating(self.gating, self.storage_time_us())
        if not report.ok:
            raise ConfigError(
                "gating parameter requirement violated: "
                + "; ".join(report.violations),
                key="gating",
            )
        self.storage()  # raises on inconsistent branch probabilities


# ---- TOML mapping ----------------------------------------------------------

_SOURCE_KEYS = {
    "pair_rate_cps": "pair_rate_cps",
    "herald_singles_cps": "herald_singles_cps",
    "signal_singles_cps": "signal_singles_cps",
    "correlation_time_ns": "correlation_time_ns",
    "g2_cross_max": "g2_cross_max",
    "delta1_mhz": "delta1_mhz",
    "delta2_mhz": "delta2_mhz",
    "power1_mw": "power1_mw",
    "power2_mw": "power2_mw",
    "spectral_slope": "spectral_slope",
}
_FEATURE_KEYS = ("center_mhz", "fwhm_mhz", "weight", "shape")
_MEMORY_KEYS = (
    "comb_spacing_mhz",
    "comb_bandwidth_mhz",
    "tooth_optical_depth",
    "background_depth",
    "finesse",
    "echo_width_constant",
    "polarization_factor",
    "field_t",
    "comb_center_mhz",
    "eta_afc",
)
_TRANSITION_KEYS = (
    "g_ground",
    "g_excited",
    "inhomogeneous_fwhm_mhz",
    "spin_splitting_ghz_per_t",
    "zero_field_detuning_ghz",
    "temperature_k",
)
_LINK_KEYS = ("length_km", "attenuation_db_per_km", "excess_loss_db", "group_index")
_GATING_KEYS = ("t_on_us", "t_off_us", "tau_d_us")
_DETECTOR_KEYS = (
    "herald_efficiency",
    "signal_efficiency",
    "herald_dark_cps",
    "signal_dark_cps",
)
_RUN_KEYS = ("duration_s", "seed", "duty", "gate_duty")


def _section(doc, name):
    if name not in doc:
        raise ConfigError("required section missing", key=name)
    sec = doc.pop(name)
    if not isinstance(sec, dict):
        raise ConfigError("section must be a table", key=name)
    return dict(sec)


def _take(sec, section_name, key, kind=float, required=True, default=None):
    if key not in sec:
        if required:
            raise ConfigError("required key missing", key=f"{section_name}.{key}")
        return default
    val = sec.pop(key)
    try:
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise TypeError
            return float(val)
        if kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise TypeError
            return int(val)
        if kind is str:
            if not isinstance(val, str):
                raise TypeError
            return val
    except TypeError:
        raise ConfigError(
            f"expected {kind.__name__}, got {type(val).__name__} ({val!r})",
            key=f"{section_name}.{key}",
        ) from None
    raise AssertionError(kind)


def _reject_unknown(sec, section_name):
    if sec:
        key = sorted(sec)[0]
        raise ConfigError("unknown key", key=f"{section_name}.{key}")


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    doc = dict(doc)

    sec = _section(doc, "source")
    spectrum_tables = sec.pop("spectrum", None)
    src_kwargs = {}
    for toml_key, attr in _SOURCE_KEYS.items():
        src_kwargs[attr] = _take(sec, "source", toml_key)
    _reject_unknown(sec, "source")
    source = SourceConfig(**src_kwargs)

    if not spectrum_tables:
        raise ConfigError("required key missing", key="source.spectrum")
    feats = []
    for i, tab in enumerate(spectrum_tables):
        tab = dict(tab)
        name = f"source.spectrum[{i}]"
        feats.append(
            SpectralFeature(
                center_mhz=_take(tab, name, "center_mhz"),
                fwhm_mhz=_take(tab, name, "fwhm_mhz"),
                weight=_take(tab, name, "weight"),
                shape=_take(tab, name, "shape", str, required=False, default="gaussian"),
            )
        )
        _reject_unknown(tab, name)
    spectrum = SpectralProfile(tuple(feats))

    sec = _section(doc, "memory")
    trans_tab = sec.pop("transition", None)
    mem_vals = {k: _take(sec, "memory", k, required=(k != "eta_afc")) for k in _MEMORY_KEYS}
    _reject_unknown(sec, "memory")
    if trans_tab is None:
        raise ConfigError("required section missing", key="memory.transition")
    trans_tab = dict(trans_tab)
    transition = ErTransitionConfig(
        **{k: _take(trans_tab, "memory.transition", k) for k in _TRANSITION_KEYS}
    )
    _reject_unknown(trans_tab, "memory.transition")
    memory = MemoryConfig(
        afc=AfcConfig(
            comb_spacing_mhz=mem_vals["comb_spacing_mhz"],
            comb_bandwidth_mhz=mem_vals["comb_bandwidth_mhz"],
            tooth_optical_depth=mem_vals["tooth_optical_depth"],
            background_depth=mem_vals["background_depth"],
            finesse=mem_vals["finesse"],
            echo_width_constant=mem_vals["echo_width_constant"],
        ),
        transition=transition,
        polarization_factor=mem_vals["polarization_factor"],
        field_t=mem_vals["field_t"],
        comb_center_mhz=mem_vals["comb_center_mhz"],
        eta_afc=mem_vals["eta_afc"],
    )

    sec = _section(doc, "link")
    link = FiberConfig(**{k: _take(sec, "link", k) for k in _LINK_KEYS})
    _reject_unknown(sec, "link")

    sec = _section(doc, "gating")
    gating = GatingConfig(**{k: _take(sec, "gating", k) for k in _GATING_KEYS})
    _reject_unknown(sec, "gating")

    sec = _section(doc, "detectors")
    detectors = DetectorConfig(**{k: _take(sec, "detectors", k) for k in _DETECTOR_KEYS})
    _reject_unknown(sec, "detectors")

    sec = _section(doc, "run")
    run = RunConfig(
        duration_s=_take(sec, "run", "duration_s"),
        seed=_take(sec, "run", "seed", int),
        duty=_take(sec, "run", "duty"),
        gate_duty=_take(sec, "run", "gate_duty", required=False),
    )
    _reject_unknown(sec, "run")

    _reject_unknown(doc, "scenario")
    return ScenarioConfig(source, spectrum, memory, link, gating, detectors, run)


def load_scenario(path) -> ScenarioConfig:
    with open(path, "rb") as fh:
        try:
            doc = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"TOML parse error in {path}: {exc}")
    return scenario_from_dict(doc)


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}")
    return scenario_from_dict(doc)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        # TOML floats need a dot or exponent
        if "." not in text and "e" not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise ConfigError(f"cannot serialise {type(value).__name__}")


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Canonical TOML text for a scenario (stable key order, repr floats)."""
    out = []

    def sec(name, pairs):
        out.append(f"[{name}]")
        for k, v in pairs:
            if v is None:
                continue
            out.append(f"{k} = {_fmt(v)}")
        out.append("")

    s = cfg.source
    sec("source", [(k, getattr(s, a)) for k, a in _SOURCE_KEYS.items()])
    for f in cfg.spectrum.features:
        out.append("[[source.spectrum]]")
        for k in _FEATURE_KEYS:
            out.append(f"{k} = {_fmt(getattr(f, k))}")
        out.append("")

    m, afc = cfg.memory, cfg.memory.afc
    sec(
        "memory",
        [
            ("comb_spacing_mhz", afc.comb_spacing_mhz),
            ("comb_bandwidth_mhz", afc.comb_bandwidth_mhz),
            ("tooth_optical_depth", afc.tooth_optical_depth),
            ("background_depth", afc.background_depth),
            ("finesse", afc.finesse),
            ("echo_width_constant", afc.echo_width_constant),
            ("polarization_factor", m.polarization_factor),
            ("field_t", m.field_t),
            ("comb_center_mhz", m.comb_center_mhz),
            ("eta_afc", m.eta_afc),
        ],
    )
    sec(
        "memory.transition",
        [(k, getattr(m.transition, k)) for k in _TRANSITION_KEYS],
    )
    sec("link", [(k, getattr(cfg.link, k)) for k in _LINK_KEYS])
    sec("gating", [(k, getattr(cfg.gating, k)) for k in _GATING_KEYS])
    sec("detectors", [(k, getattr(cfg.detectors, k)) for k in _DETECTOR_KEYS])
    sec("run", [(k, getattr(cfg.run, k)) for k in _RUN_KEYS])
    return "\n".join(out)


def save_scenario(cfg: ScenarioConfig, path):
    text = dump_scenario(cfg)
    with open(path, "w") as fh:
        fh.write(text)


def scenario_hash(cfg: ScenarioConfig) -> str:
    """Stable content hash of the physics sections of the canonical dump.

    The [run] block (duration, seed, duty) is excluded: a stream taken for
    a different time or seed still belongs to the same link configuration,
    and those values are recorded in the stream metadata anyway. [run] is
    always the last section of the canonical serialisation.
    """
    text = dump_scenario(cfg).split("[run]", 1)[0]
    return hashlib.sha256(text.encode()).hexdigest()


# ---- named scenarios shipped with the package ------------------------------

NAMED_SCENARIOS = (
    "source_characterization",
    "storage_retrieval",
    "multimode_37",
    "fiber_extension",
)


def named_scenario_text(name: str) -> str:
    if name not in NAMED_SCENARIOS:
        raise ConfigError(
            f"unknown scenario '{name}'; available: {', '.join(NAMED_SCENARIOS)}"
        )
    return resources.files("hqnet.data").joinpath(f"{name}.toml").read_text()


def load_named_scenario(name: str) -> ScenarioConfig:
    return loads_scenario(named_scenario_text(name))


def operating_points_path():
    return resources.files("hqnet.data").joinpath("detuning_operating_points.csv")
