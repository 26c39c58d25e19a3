"""Heralded pair source: singles, coincidences, and the cross-correlation peak.

Simulates a short bench run, fits the delay histogram, and checks the
classicality bound. Writes the histogram to pair_histogram.csv.
"""

import numpy as np

import hqnet
from hqnet.analysis import cauchy_schwarz, coincidence_histogram, cross_g2
from hqnet.simulate import generate
from hqnet.source import mean_pair_number

cfg = hqnet.load_named_scenario("source_characterization")
stream = generate(cfg, seed=2, jobs=2)
meta = stream.meta

print(f"simulated {cfg.run.duration_s:.0f} s wall clock ({meta['active_s']:.2f} s gated)")
print(f"heralds   {meta['n_herald']:>9d}  ({meta['n_herald'] / meta['active_s']:.0f} cps)")
print(f"signals   {meta['n_signal']:>9d}  ({meta['n_signal'] / meta['active_s']:.0f} cps)")

hist = coincidence_histogram(stream, bin_ps=50, range_ps=560_000)
fit = cross_g2(hist, cfg.gating, peak_shape="exponential")
print(f"\ncross-correlation peak: g2 = {fit.g2_max:.1f} +- {fit.g2_err:.1f}")
print(f"  delay {fit.peak_delay_ps / 1e3:.2f} ns, fwhm {fit.peak_fwhm_ps / 1e3:.2f} ns")
print(f"  coincidences in peak {fit.peak_counts:.0f}, background {fit.background_per_bin:.1f}/bin")

# thermal auto-correlations of each arm sit at 2 for a squeezed-vacuum source
r = cauchy_schwarz(fit.g2_max, 2.0, 2.0)
print(f"  Cauchy-Schwarz ratio {r:.0f}  ({'non' if r > 1 else ''}classical)")

src = cfg.source
mu = mean_pair_number(
    src.herald_singles_cps,
    src.signal_singles_cps,
    src.pair_rate_cps,
    src.correlation_time_ns,
)
print(f"\nmean pair number per coherence time: {mu:.4f}")

hist.to_csv("pair_histogram.csv")
print("wrote pair_histogram.csv")
