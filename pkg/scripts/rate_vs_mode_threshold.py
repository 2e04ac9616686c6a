#!/usr/bin/env python3
"""Average rates of cellular and potential-D2D UEs versus the mode-selection
threshold, for overlay (several eta) and underlay (several beta).

Writes plot-ready CSVs; pair columns (mu, t_c, t_d, t_d_hat) per sharing
parameter value.
"""

import argparse
import csv
import pathlib

import numpy as np

from d2dshare import NetworkParams, overlay_rates, underlay_rates


def sweep(params, mus, mode):
    rows = []
    for m in mus:
        p = params.replace(mu=float(m))
        rep = overlay_rates(p) if mode == "overlay" else underlay_rates(p)
        rows.append((float(m), rep.t_c, rep.t_d, rep.t_d_hat))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="data", help="output directory")
    ap.add_argument("--points", type=int, default=40)
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    base = NetworkParams()
    mus = np.linspace(20.0, 600.0, args.points)

    for eta in (0.1, 0.2, 0.3):
        rows = sweep(base.replace(eta=eta), mus, "overlay")
        path = outdir / f"overlay_rates_eta{eta:.1f}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu [m]", "t_c [nat/s/Hz]", "t_d [nat/s/Hz]", "t_d_hat [nat/s/Hz]"])
            w.writerows(rows)
        print("wrote", path)

    for beta in (0.25, 0.5, 1.0):
        rows = sweep(base.replace(beta=beta), mus, "underlay")
        path = outdir / f"underlay_rates_beta{beta:.2f}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu [m]", "t_c [nat/s/Hz]", "t_d [nat/s/Hz]", "t_d_hat [nat/s/Hz]"])
            w.writerows(rows)
        print("wrote", path)


if __name__ == "__main__":
    main()
