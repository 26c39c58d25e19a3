"""Simulation and analysis toolkit for a gated photon-pair + AFC-memory link.

The package splits along the experiment: spectral line/profile math,
photon-pair source model, comb memory model, neighbouring-nucleus level
structure, fiber + gating link, a Monte-Carlo time-tag generator, and the
analysis pipeline that turns streams back into the published figures of
merit. `hqnet.cli` provides the command-line front end.
"""

from .errors import (
    HqnetError,
    ConfigError,
    GridTooCoarse,
    ProbabilityOverflow,
    CombinatorialOverflow,
    ZeroDistance,
    WindowOverflow,
    UnsortedStream,
    InsufficientStatistics,
    FitDegenerate,
    ModelInconsistent,
    StreamFormatError,
)
from .spectral import (
    SpectralFeature,
    SpectralProfile,
    AbsorptionProfile,
    SampledSpectrum,
    auto_grid,
    notch_filter,
    absorbed_fraction,
)
from .source import (
    SourceConfig,
    OperatingPoint,
    scaled_pair_rate,
    feature_center,
    cross_correlation_profile,
    mean_pair_number,
    load_operating_points,
    apply_operating_point,
)
from .memory import (
    AfcConfig,
    ErTransitionConfig,
    EchoParameters,
    HoleDecayModel,
    StorageOutcome,
    zeeman_shift,
    electron_polarization,
    afc_efficiency,
    optimal_finesse,
    echo_parameters,
    hole_depth,
    storage_outcome,
)
from .superhyperfine import (
    NuclearSpinSite,
    SpinLevelSet,
    AntiholeResult,
    vanadium_sites,
    yttrium_sites,
    dipolar_field,
    spin_levels,
    transition_spacing,
    band_spectrum,
    band_span_mhz,
    antihole_offsets,
)
from .link import (
    FiberConfig,
    GatingConfig,
    GatingReport,
    fiber_transmission,
    fiber_delay_s,
    validate_gating,
    background_profile,
)
from .histogram import Histogram
from .timetags import (
    CH_HERALD,
    CH_SIGNAL,
    TimeTagStream,
    read_hqtt,
    write_hqtt,
    read_metadata,
    write_metadata,
)
from .scenario import (
    TOOL_VERSION,
    NAMED_SCENARIOS,
    MemoryConfig,
    DetectorConfig,
    RunConfig,
    ScenarioConfig,
    load_scenario,
    loads_scenario,
    save_scenario,
    dump_scenario,
    scenario_hash,
    load_named_scenario,
    operating_points_path,
)
from .simulate import WindowSchedule, generate, multimode_windows
from .analysis import (
    CorrelationResult,
    RateEstimate,
    AutoG2Result,
    ModeStats,
    NoiseBudget,
    LossBudget,
    DEFAULT_LOSS_COMPONENTS,
    INTERNAL_COMPONENT_NAMES,
    coincidence_histogram,
    cross_g2,
    windowed_rate,
    split_signal,
    heralded_auto_g2,
    cauchy_schwarz,
    time_bandwidth_product,
    multimode_stats,
    noise_budget,
    loss_budget,
)

__version__ = TOOL_VERSION
