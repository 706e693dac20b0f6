"""Distance regularization versus periodic redistancing, side by side.

The classical way to keep a level-set function well behaved is to stop
every so often and rebuild it as a signed distance function.  That works,
but each rebuild can shift the zero contour, and between rebuilds the
field drifts.  The distance-regularized flow folds the repair into the
evolution itself.  This script runs both schemes from the same seed with
the same external parameters and prints what happens to (a) the final
segmentation quality and (b) the distance property |grad phi| = 1 near
the contour, tracked iteration by iteration.

Run:  python demos/03_baseline_comparison.py [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from drlseg import (
    BaselineParams,
    BilateralParams,
    CaseConfig,
    DrlseParams,
    baseline_lsf_step,
    bilateral_filter,
    dice,
    drlse_step,
    edge_indicator,
    make_phantom,
    reinitialize,
    run_case,
    run_case_baseline,
)
from drlseg.cli import save_overlay


def band_deviation(phi, width=3.0):
    gy, gx = np.gradient(phi)
    band = np.abs(phi) < width
    return float(np.mean(np.abs(np.hypot(gx, gy)[band] - 1.0)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out/baseline", help="output directory")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    img, endo_label, epi_label = make_phantom(seed=7)
    cfg = CaseConfig()

    # --- full pipelines -----------------------------------------------------
    d_endo, d_epi, (d_endo_rep, d_epi_rep) = run_case(img, (endo_label, epi_label), cfg)
    b_endo, b_epi, (b_endo_rep, b_epi_rep) = run_case_baseline(
        img, (endo_label, epi_label), cfg)

    save_overlay(img, d_endo.contour, d_epi.contour, out / "regularized.ppm")
    save_overlay(img, b_endo.contour, b_epi.contour, out / "redistanced.ppm")

    print("segmentation quality (dice), same seed and external parameters:")
    print(f"  {'':12s}{'regularized':>14s}{'redistanced':>14s}")
    print(f"  {'inner':12s}{d_endo_rep.dice:14.4f}{b_endo_rep.dice:14.4f}")
    print(f"  {'outer':12s}{d_epi_rep.dice:14.4f}{b_epi_rep.dice:14.4f}")

    # --- distance property over time ---------------------------------------
    g = edge_indicator(bilateral_filter(img, BilateralParams()) * 255.0, 1.5)
    yy, xx = np.mgrid[0:128, 0:128]
    phi0 = np.hypot(xx - 63.5, yy - 63.5) - 28.0

    params = DrlseParams()
    base = BaselineParams()
    phi_d = phi0.copy()
    phi_b = phi0.copy()
    dev_d, dev_b = [], []
    for k in range(85):
        phi_d = drlse_step(phi_d, g, params)
        phi_b = baseline_lsf_step(phi_b, g, base)
        if (k + 1) % base.reinit_every == 0:
            phi_b = reinitialize(phi_b)
        dev_d.append(band_deviation(phi_d))
        dev_b.append(band_deviation(phi_b))

    print("\nmean |grad phi| deviation from 1 near the contour "
          "(lower is better):")
    print(f"  {'iteration':>10s}{'regularized':>14s}{'redistanced':>14s}")
    for k in range(9, 85, 15):
        print(f"  {k + 1:>10d}{dev_d[k]:14.4f}{dev_b[k]:14.4f}")
    print(f"  {'run mean':>10s}{np.mean(dev_d):14.4f}{np.mean(dev_b):14.4f}")
    print("\nthe redistanced run sawtooths: deviation builds between "
          "rebuilds (every "
          f"{base.reinit_every} iterations) and snaps back after each one")
    print(f"overlays in {out}/")


if __name__ == "__main__":
    main()
