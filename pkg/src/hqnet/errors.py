"""Exception types shared across the package."""


class HqnetError(Exception):
    """Base class for package-specific errors."""


class ConfigError(HqnetError):
    """Invalid configuration value; carries a dotted key path when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class GridTooCoarse(HqnetError):
    """Sampling grid too coarse for the narrowest spectral feature."""


class ProbabilityOverflow(HqnetError):
    """Branch probabilities sum to more than one."""


class CombinatorialOverflow(HqnetError):
    """Level-combination count exceeds the enumeration cap."""


class ZeroDistance(HqnetError):
    """Point-dipole field requested at zero separation."""


class WindowOverflow(HqnetError):
    """Mode windows do not fit inside the optical gate."""


class UnsortedStream(HqnetError):
    """Time-tag stream is not monotonically sorted."""


class InsufficientStatistics(HqnetError):
    """Not enough events to form the requested estimator."""


class FitDegenerate(HqnetError):
    """Least-squares peak fit failed to converge."""


class ModelInconsistent(HqnetError):
    """Noise-model solution is unphysical for the supplied inputs."""


class StreamFormatError(HqnetError):
    """Binary time-tag container is malformed."""
