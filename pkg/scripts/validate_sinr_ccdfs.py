#!/usr/bin/env python3
"""Reproduce both SINR-CCDF validation figures: hex-grid uplink empirical vs
the analytical cellular curve, and the D2D link empirical vs its closed form.

Thin wrapper over the CLI validate subcommand so the outputs carry manifests.
"""

import argparse
import pathlib
import sys

from d2dshare.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="data")
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=20231)
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    runs = [
        ("uplink_hex", 0.05, outdir / "ccdf_uplink_hex.csv"),
        ("d2d_overlay", 0.02, outdir / "ccdf_d2d_overlay.csv"),
        ("d2d_underlay", 0.03, outdir / "ccdf_d2d_underlay.csv"),
    ]
    status = 0
    for mode, tol, path in runs:
        code = cli_main([
            "validate", "--mode", mode, "--trials", str(args.trials),
            "--seed", str(args.seed), "--tolerance", str(tol), "--output", str(path),
        ])
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
