"""Tune the pump detuning so the photon spectrum lands in the memory band.

The emitted spectrum is a mixture of features whose common center moves
with the second pump detuning; the memory only accepts a fixed band.
Scans the detuning, prints the in-band fraction, and shows a notch filter
carving the spectrum.
"""

import numpy as np

import hqnet
from hqnet.source import feature_center
from hqnet.spectral import AbsorptionProfile, SpectralProfile, absorbed_fraction, notch_filter


def main():
    cfg = hqnet.load_named_scenario("storage_retrieval")
    band = cfg.memory.afc.comb_bandwidth_mhz
    center = cfg.memory.comb_center_mhz
    print(f"memory acceptance: {band:.0f} MHz band at {center:+.0f} MHz")
    print(f"photon spectrum: {len(cfg.spectrum.features)} features, "
          f"weight {cfg.spectrum.total_weight():.2f}\n")

    print("delta2 (MHz)   center shift   in-band fraction")
    rows = []
    for d2 in np.linspace(cfg.source.delta2_mhz - 300, cfg.source.delta2_mhz + 300, 13):
        shift = feature_center(cfg.source, d2)
        frac = absorbed_fraction(cfg.spectrum.shifted(shift), center, band)
        rows.append((d2, shift, frac))
        print(f"   {d2:8.1f}     {shift:8.1f}        {frac:.4f}")
    best = max(rows, key=lambda r: r[2])
    print(f"\nbest of scan: delta2 = {best[0]:.0f} MHz -> {best[2]:.1%} in band")

    # a narrow absorber in the beam removes its slice of the spectrum
    absorber = AbsorptionProfile(SpectralProfile.single(0.0, 60.0), 3.0)
    filtered = notch_filter(cfg.spectrum, absorber)
    print(f"notch filter (OD 3, 60 MHz): transmitted fraction "
          f"{filtered.transmitted_fraction:.3f}")

    with open("matching_scan.csv", "w") as fh:
        fh.write("delta2_mhz,center_shift_mhz,in_band_fraction\n")
        for d2, shift, frac in rows:
            fh.write(f"{d2:.6g},{shift:.6g},{frac:.6g}\n")
    print("wrote matching_scan.csv")


if __name__ == "__main__":
    main()
