"""Echo rate versus fiber length, plus one deployed-fiber operating point.

Usage: python fiber_sweep.py [--jobs N]
"""

import argparse
import dataclasses
import math

import numpy as np

import hqnet
from hqnet.analysis import windowed_rate
from hqnet.cli import SweepSpec, sweep_table
from hqnet.link import FiberConfig, fiber_delay_s
from hqnet.simulate import generate

p = argparse.ArgumentParser()
p.add_argument("--jobs", type=int, default=2)
args = p.parse_args()

cfg = hqnet.load_named_scenario("fiber_extension")
lengths = (0.0, 10.0, 25.0, 49.2)

rows = sweep_table(
    cfg,
    SweepSpec("link.length_km", lengths, repeats=2),
    "echo_rate",
    base_seed=3,
    jobs=args.jobs,
)
print("length (km)   echo rate (cps)")
for km, rate, err, n in rows:
    print(f"   {km:6.1f}      {rate:9.1f} +- {err:.1f}")

slope = np.polyfit([r[0] for r in rows], np.log10([r[1] for r in rows]), 1)[0]
att = cfg.link.attenuation_db_per_km
print(f"log10(rate) slope {slope:.4f}/km "
      f"(fiber attenuation alone would give {-att / 10:.4f}/km)")

# a real deployed span: extra splice/connector loss on top of the fiber
deployed = FiberConfig(length_km=10.6, attenuation_db_per_km=0.32, excess_loss_db=4.168)
dep_cfg = dataclasses.replace(cfg, link=deployed)
total_db = deployed.length_km * deployed.attenuation_db_per_km + deployed.excess_loss_db
print(f"\ndeployed span: {deployed.length_km} km, {total_db:.2f} dB total, "
      f"one-way delay {fiber_delay_s(deployed) * 1e6:.1f} us")

half = int(round(1.45 * cfg.echo_fwhm_ns() * 1e3))
cyc = int(round(cfg.gating.cycle_us * 1e6))
ests = []
for conf in (cfg, dep_cfg):
    st = generate(conf, seed=303, jobs=args.jobs)
    echo_ps = st.meta["fiber_delay_ps"] + st.meta["storage_time_ps"]
    ests.append(windowed_rate(st, center_ps=echo_ps, half_window_ps=half, cycle_ps=cyc))
ratio = ests[1].rate_cps / ests[0].rate_cps
print(f"echo rate {ests[1].rate_cps:.0f} vs {ests[0].rate_cps:.0f} cps back-to-back: "
      f"ratio {ratio:.4f} (pure attenuation: {10 ** (-total_db / 10):.4f})")

with open("fiber_sweep.csv", "w") as fh:
    fh.write("length_km,echo_rate_cps,stderr_cps,n\n")
    for km, rate, err, n in rows:
        fh.write(f"{km:.6g},{rate:.6g},{err:.6g},{n}\n")
print("wrote fiber_sweep.csv")
