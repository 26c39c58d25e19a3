"""Generic binned histogram container used for delay and frequency spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass
class Histogram:
    """Uniformly binned counts.

    Units follow the axis tag: "delay_ps" bins are picoseconds,
    "frequency_mhz" bins are MHz. counts[i] covers
    [start + i*bin_width, start + (i+1)*bin_width).
    """

    bin_width: float
    start: float
    end: float
    counts: np.ndarray
    axis: str = "delay_ps"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ConfigError("bin width must be > 0")
        n = int(np.ceil((self.end - self.start) / self.bin_width - 1e-9))
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (n,):
            raise ConfigError(
                f"counts length {self.counts.shape} != expected ({n},) for "
                f"[{self.start}, {self.end}) at width {self.bin_width}"
            )

    @classmethod
    def from_values(cls, values, bin_width, start, end, axis="delay_ps", meta=None):
        n = int(np.ceil((end - start) / bin_width - 1e-9))
        values = np.asarray(values, dtype=float)
        idx = np.floor((values - start) / bin_width).astype(np.int64)
        ok = (idx >= 0) & (idx < n)
        counts = np.bincount(idx[ok], minlength=n).astype(np.int64)
        return cls(bin_width, start, end, counts, axis=axis, meta=meta or {})

    def centers(self):
        n = self.counts.size
        return self.start + (np.arange(n) + 0.5) * self.bin_width

    def total(self):
        return int(self.counts.sum())

    def rebin(self, factor):
        """Merge groups of `factor` adjacent bins; totals are conserved."""
        factor = int(factor)
        if factor < 1:
            raise ConfigError("rebin factor must be >= 1")
        n = self.counts.size
        if n % factor != 0:
            raise ConfigError(f"bin count {n} not divisible by {factor}")
        counts = self.counts.reshape(n // factor, factor).sum(axis=1)
        return Histogram(
            self.bin_width * factor,
            self.start,
            self.end,
            counts,
            axis=self.axis,
            meta=dict(self.meta),
        )

    def slice(self, lo, hi):
        """Sub-histogram covering full bins inside [lo, hi)."""
        i0 = int(np.ceil((lo - self.start) / self.bin_width - 1e-9))
        i1 = int(np.floor((hi - self.start) / self.bin_width + 1e-9))
        i0 = max(i0, 0)
        i1 = min(i1, self.counts.size)
        if i1 <= i0:
            raise ConfigError("empty histogram slice")
        return Histogram(
            self.bin_width,
            self.start + i0 * self.bin_width,
            self.start + i1 * self.bin_width,
            self.counts[i0:i1],
            axis=self.axis,
            meta=dict(self.meta),
        )

    def to_csv(self, path, value_name="counts"):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{self.axis}_center", value_name])
            for c, n in zip(self.centers(), self.counts):
                w.writerow([f"{c:.6f}", int(n)])
