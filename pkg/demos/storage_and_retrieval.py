"""Store heralded photons in the comb and watch them come back.

Runs the storage scenario, checks the gate timing, and measures the echo:
rate in the retrieval window, herald-echo correlation, and the conditional
auto-correlation of the retrieved field.
"""

import time

import hqnet
from hqnet.analysis import (
    coincidence_histogram,
    cross_g2,
    heralded_auto_g2,
    time_bandwidth_product,
    windowed_rate,
)
from hqnet.link import validate_gating
from hqnet.simulate import generate

cfg = hqnet.load_named_scenario("storage_retrieval")
gate = cfg.gating
check = validate_gating(gate, cfg.storage_time_us())
print(f"gate open {gate.t_on_us} us / closed until {gate.t_off_us} us, "
      f"storage {cfg.storage_time_us():.3f} us -> {'ok' if check.ok else check.reason}")
print(f"echo fwhm {cfg.echo_fwhm_ns():.1f} ns, time-bandwidth "
      f"{time_bandwidth_product(cfg.storage_time_us(), cfg.echo_fwhm_ns()):.0f}")

t0 = time.time()
stream = generate(cfg, seed=7, jobs=2)
print(f"\n{stream.meta['n_herald']} heralds, {stream.meta['n_signal']} signal events "
      f"({time.time() - t0:.1f} s to simulate {cfg.run.duration_s:.0f} s)")

echo_ps = stream.meta["fiber_delay_ps"] + stream.meta["storage_time_ps"]
cycle_ps = int(round(gate.cycle_us * 1e6))
est = windowed_rate(
    stream,
    center_ps=echo_ps,
    half_window_ps=int(round(1.45 * cfg.echo_fwhm_ns() * 1e3)),
    cycle_ps=cycle_ps,
)
print(f"echo rate {est.rate_cps:.0f} +- {est.stderr_cps:.0f} cps "
      f"({est.peak_counts} in window, {est.background_counts:.0f} accidental)")

hist = coincidence_histogram(stream, bin_ps=2_000, range_ps=80_000, center_ps=echo_ps)
fit = cross_g2(hist, peak_shape="gaussian", peak_guess_ps=echo_ps)
print(f"herald-echo g2 = {fit.g2_max:.1f} +- {fit.g2_err:.1f} "
      f"(fwhm {fit.peak_fwhm_ps / 1e3:.1f} ns)")

auto = heralded_auto_g2(stream, window_ns=1.0)
tag = "single-photon-like" if auto.value < 0.5 else "not sub-poissonian"
print(f"heralded auto-g2(0) = {auto.value:.3f} +- {auto.stderr:.3f}  ({tag})")
