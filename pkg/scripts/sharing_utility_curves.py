#!/usr/bin/env python3
"""Proportional-fair utility versus the sharing parameter, per potential-D2D
load q: overlay utility over eta and underlay utility over beta.

Shows the optimum locations: the overlay maximiser is insensitive to q once
the mode threshold is large (it converges to the D2D weight), while the
underlay maximiser shifts left as q grows.
"""

import argparse
import csv
import math
import pathlib

import numpy as np

from d2dshare import NetworkParams, derive
from d2dshare.overlay import cellular_spectral_efficiency, d2d_spectral_efficiency
from d2dshare.underlay import optimal_access_factor, underlay_rates


def overlay_utility_curve(params, etas):
    d = derive(params)
    rc = cellular_spectral_efficiency(params)
    rd = d2d_spectral_efficiency(params)
    rows = []
    for eta in etas:
        t_c = (1.0 - eta) * rc
        t_d = (1.0 - d.p_d2d_mode) * t_c + d.p_d2d_mode * eta * rd
        rows.append((float(eta), params.w_c * math.log(t_c) + params.w_d * math.log(t_d)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="data")
    ap.add_argument("--mu", type=float, default=710.0, help="mode threshold for the overlay curves")
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    base = NetworkParams(bandwidth_normalization=False)
    etas = np.linspace(0.02, 0.98, 49)
    betas = np.linspace(0.02, 1.0, 50)

    for q in (0.1, 0.2, 0.4):
        rows = overlay_utility_curve(base.replace(q=q, mu=args.mu), etas)
        path = outdir / f"overlay_utility_q{q:.1f}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eta [dimensionless]", "utility [weighted log rate]"])
            w.writerows(rows)
        print("wrote", path)

    for q in (0.2, 0.6, 1.0):
        p = base.replace(q=q)
        rows = [
            (float(b), underlay_rates(p.replace(beta=float(b))).utility) for b in betas
        ]
        star = optimal_access_factor(p)
        path = outdir / f"underlay_utility_q{q:.1f}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["beta [dimensionless]", "utility [weighted log rate]"])
            w.writerows(rows)
        print(f"wrote {path} (beta* = {star:.4f})")


if __name__ == "__main__":
    main()
