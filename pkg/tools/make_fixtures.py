"""Regenerate the reconstructed force-gap series in data/reconstructed/.

The measured force-gap series are available only as plots, so these files are
synthetic: the analytic PM-MRE force shape on the default 22-point grid,
rescaled so the 5 mm value matches the measured anchor, plus Gaussian noise of
1% of the peak force, two independent series per disc.  MRE30 has no measured
anchor; its factor is interpolated linearly in powder content between the
MRE15 and MRE40 factors.
"""
import pathlib

import numpy as np

from deabias import csvio
from deabias.config import PAPER_DISCS, PAPER_MAGNET, paper_disc, paper_scale
from deabias.magnetics import ForceCurve, force_sweep

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "reconstructed"
NOISE = 0.01
ANCHORS_N = {"MRE15": 0.2, "MRE40": 0.6}  # measured force at 5 mm
POWDER = {"MRE15": 15.0, "MRE30": 30.0, "MRE40": 40.0}  # wt%


def anchor_factors(curves):
    factors = {n: ANCHORS_N[n] / curves[n].force_array[0] for n in ANCHORS_N}
    lo, hi = "MRE15", "MRE40"
    frac = (POWDER["MRE30"] - POWDER[lo]) / (POWDER[hi] - POWDER[lo])
    factors["MRE30"] = factors[lo] + frac * (factors[hi] - factors[lo])
    return factors


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    curves = {name: force_sweep("pm_mre", magnet=PAPER_MAGNET, disc=paper_disc(name),
                                scale=paper_scale()) for name in PAPER_DISCS}
    factors = anchor_factors(curves)
    for k, name in enumerate(PAPER_DISCS):
        clean = curves[name].force_array * factors[name]
        peak = float(clean.max())
        for series in (1, 2):
            rng = np.random.default_rng(100 * k + series)
            noisy = clean + rng.normal(0.0, NOISE * peak, clean.size)
            noisy = ForceCurve(curves[name].gaps, tuple(np.maximum(noisy, 0.0)), "measurement")
            header = (f"# RECONSTRUCTION, not measured data: analytic {name} shape x "
                      f"{factors[name]:.4f} (5 mm anchor), noise sigma = 1% of peak, "
                      f"seed {100 * k + series}\n")
            path = OUT / f"{name.lower()}_series{series}.csv"
            path.write_text(header + csvio.force_curve_csv(noisy), encoding="utf-8")
            print(path)


if __name__ == "__main__":
    main()
